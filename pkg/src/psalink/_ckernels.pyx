# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the loops in ``_pykernels``; signatures match exactly."""
from libc.math cimport exp, log, sqrt, fabs

PROFILE_CONSTANT = 0
PROFILE_POWER = 1


def fold_link(const double[::1] taus, const double[::1] gains,
              double s_q, double s_i, double n_q, double n_i,
              double[::1] node_power):
    cdef Py_ssize_t r = gains.shape[0]
    cdef Py_ssize_t k
    cdef bint record = node_power.shape[0] > 0
    cdef double t, g, vac
    if taus.shape[0] != r + 1:
        raise ValueError("taus must have one more entry than gains")
    if record and node_power.shape[0] < r + 1:
        raise ValueError("node_power buffer too short")
    with nogil:
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


cdef inline void _bounds(double a, double b, double budget, double* lo, double* hi) noexcept nogil:
    cdef double disc = budget * budget - 4.0 * a * b
    cdef double root
    if disc <= 0.0:
        lo[0] = sqrt(b / a)
        hi[0] = lo[0]
        return
    root = budget + sqrt(disc)
    hi[0] = root / (2.0 * a)
    lo[0] = 2.0 * b / root
    if lo[0] < 1e-300:
        lo[0] = 1e-300


def gain_bounds(double a, double b, double budget):
    cdef double lo, hi
    _bounds(a, b, budget, &lo, &hi)
    return lo, hi


def project_gains(const double[::1] taus, const double[::1] theta,
                  double s_q, double s_i, double n_q, double n_i,
                  double budget, double[::1] gains_out):
    cdef Py_ssize_t r = theta.shape[0]
    cdef Py_ssize_t k
    cdef double t, vac, aq, ai, lo, hi, th, g
    if taus.shape[0] != r + 1 or gains_out.shape[0] < r:
        raise ValueError("inconsistent array lengths")
    with nogil:
        for k in range(r):
            t = taus[k]
            vac = 0.5 * (1.0 - t)
            aq = t * (s_q + n_q) + vac
            ai = t * (s_i + n_i) + vac
            _bounds(aq, ai, budget, &lo, &hi)
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


cdef inline double _gamma(int kind, double alpha, double gamma_const, double nbar,
                          double amp_a, double l) noexcept nogil:
    if kind == 0:
        return gamma_const
    return 2.0 * alpha * nbar / sqrt(4.0 * nbar * nbar + 2.0 * nbar - amp_a * exp(-2.0 * alpha * l))


def rk4_integrate(int kind, double alpha, double gamma_const, double nbar, double amp_a,
                  double length, long nsteps,
                  double s_q, double s_i, double n_q, double n_i):
    cdef double h = length / nsteps if nsteps > 0 else 0.0
    cdef double half = 0.5 * h
    cdef double q_src = 0.5 * alpha
    cdef double p0 = s_q + s_i + n_q + n_i
    cdef double drift = 0.0
    cdef double prod_min = n_q * n_i
    cdef double l = 0.0
    cdef double g1, g2, g4, cq1, cq2, cq4, ci1, ci2, ci4
    cdef double k1, k2, k3, k4, d, p
    cdef long k
    if kind != 0 and kind != 1:
        raise ValueError("unknown profile kind")
    with nogil:
        g1 = _gamma(kind, alpha, gamma_const, nbar, amp_a, 0.0)
        for k in range(nsteps):
            g2 = _gamma(kind, alpha, gamma_const, nbar, amp_a, l + half)
            g4 = _gamma(kind, alpha, gamma_const, nbar, amp_a, (k + 1) * h)
            cq1 = g1 - alpha
            cq2 = g2 - alpha
            cq4 = g4 - alpha
            ci1 = -(g1 + alpha)
            ci2 = -(g2 + alpha)
            ci4 = -(g4 + alpha)

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
            d = fabs(s_q + s_i + n_q + n_i - p0)
            if d > drift:
                drift = d
            p = n_q * n_i
            if p < prod_min:
                prod_min = p
    return s_q, s_i, n_q, n_i, drift, prod_min, nsteps
