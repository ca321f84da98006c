"""Pure-Python implementations of the hot loops.

Every function here has a twin with an identical signature in
``_ckernels.pyx``. The compiled module is preferred at import time; this one
is the fallback and the reference the compiled code is tested against.

States are passed as four floats ``(s_q, s_i, n_q, n_i)``. Arrays are
sequences of float (typically contiguous float64 numpy arrays).
"""
from math import exp, log, sqrt

PROFILE_CONSTANT = 0
PROFILE_POWER = 1


def fold_link(taus, gains, s_q, s_i, n_q, n_i, node_power):
    """Propagate a state through ``len(gains)`` span+amplifier pairs and a final span.

    ``taus`` has one more entry than ``gains``. When ``node_power`` has
    ``len(taus)`` entries it receives the total power after every amplifier
    and at the link output; pass an empty buffer to skip.
    """
    r = len(gains)
    record = len(node_power) > 0
    for k in range(r):
        t = taus[k]
        g = gains[k]
        vac = 0.5 * (1.0 - t)
        s_q = g * t * s_q
        n_q = g * (t * n_q + vac)
        s_i = t * s_i / g
        n_i = (t * n_i + vac) / g
        if record:
            node_power[k] = s_q + s_i + n_q + n_i
    t = taus[r]
    vac = 0.5 * (1.0 - t)
    s_q = t * s_q
    s_i = t * s_i
    n_q = t * n_q + vac
    n_i = t * n_i + vac
    if record:
        node_power[r] = s_q + s_i + n_q + n_i
    return s_q, s_i, n_q, n_i


def gain_bounds(a, b, budget):
    """Interval of gains G with ``a*G + b/G <= budget``.

    Returns ``(lo, hi)``. When the interval is empty the minimiser
    ``sqrt(b/a)`` is returned for both ends.
    """
    disc = budget * budget - 4.0 * a * b
    if disc <= 0.0:
        g = sqrt(b / a)
        return g, g
    root = budget + sqrt(disc)
    hi = root / (2.0 * a)
    lo = 2.0 * b / root
    if lo < 1e-300:
        lo = 1e-300
    return lo, hi


def project_gains(taus, theta, s_q, s_i, n_q, n_i, budget, gains_out):
    """Map box coordinates ``theta`` in [0, 1] to power-feasible gains.

    Gains are fixed front to back. At node k the feasible gains form an
    interval [lo, hi] given the upstream state, and the gain is placed at
    ``lo**(1-theta_k) * hi**theta_k``. Returns the link output state.
    """
    r = len(theta)
    for k in range(r):
        t = taus[k]
        vac = 0.5 * (1.0 - t)
        aq = t * (s_q + n_q) + vac
        ai = t * (s_i + n_i) + vac
        lo, hi = gain_bounds(aq, ai, budget)
        th = theta[k]
        g = exp((1.0 - th) * log(lo) + th * log(hi))
        gains_out[k] = g
        s_q = g * t * s_q
        n_q = g * (t * n_q + vac)
        s_i = t * s_i / g
        n_i = (t * n_i + vac) / g
    t = taus[r]
    vac = 0.5 * (1.0 - t)
    return t * s_q, t * s_i, t * n_q + vac, t * n_i + vac


def _gamma(kind, alpha, gamma_const, nbar, amp_a, l):
    if kind == PROFILE_CONSTANT:
        return gamma_const
    return 2.0 * alpha * nbar / sqrt(4.0 * nbar * nbar + 2.0 * nbar - amp_a * exp(-2.0 * alpha * l))


def rk4_integrate(kind, alpha, gamma_const, nbar, amp_a, length, nsteps, s_q, s_i, n_q, n_i):
    """Classical RK4 on the distributed-amplification equations.

    Takes ``nsteps`` equal steps over ``[0, length]``. Returns the final state
    plus the largest deviation of total power from its initial value, the
    smallest noise product ``n_q*n_i`` seen at step boundaries, and the step
    count.
    """
    h = length / nsteps if nsteps > 0 else 0.0
    half = 0.5 * h
    q_src = 0.5 * alpha
    p0 = s_q + s_i + n_q + n_i
    drift = 0.0
    prod_min = n_q * n_i
    l = 0.0
    g1 = _gamma(kind, alpha, gamma_const, nbar, amp_a, 0.0)
    for k in range(nsteps):
        g2 = _gamma(kind, alpha, gamma_const, nbar, amp_a, l + half)
        g4 = _gamma(kind, alpha, gamma_const, nbar, amp_a, (k + 1) * h)
        # each quadrature decouples: dx/dl = c(l) x + src
        cq1, cq2, cq4 = g1 - alpha, g2 - alpha, g4 - alpha
        ci1, ci2, ci4 = -(g1 + alpha), -(g2 + alpha), -(g4 + alpha)

        k1 = cq1 * s_q
        k2 = cq2 * (s_q + half * k1)
        k3 = cq2 * (s_q + half * k2)
        k4 = cq4 * (s_q + h * k3)
        s_q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        k1 = ci1 * s_i
        k2 = ci2 * (s_i + half * k1)
        k3 = ci2 * (s_i + half * k2)
        k4 = ci4 * (s_i + h * k3)
        s_i += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        k1 = cq1 * n_q + q_src
        k2 = cq2 * (n_q + half * k1) + q_src
        k3 = cq2 * (n_q + half * k2) + q_src
        k4 = cq4 * (n_q + h * k3) + q_src
        n_q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        k1 = ci1 * n_i + q_src
        k2 = ci2 * (n_i + half * k1) + q_src
        k3 = ci2 * (n_i + half * k2) + q_src
        k4 = ci4 * (n_i + h * k3) + q_src
        n_i += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        l = (k + 1) * h
        g1 = g4
        d = abs(s_q + s_i + n_q + n_i - p0)
        if d > drift:
            drift = d
        p = n_q * n_i
        if p < prod_min:
            prod_min = p
    return s_q, s_i, n_q, n_i, drift, prod_min, nsteps
