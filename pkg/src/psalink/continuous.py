"""Distributed amplification: the limit of infinitely many, infinitely weak amplifiers.

A gain density ``gamma(l)`` (1/km) turns the span recursion into four linear
ODEs::

    dS^Q/dl = (gamma - alpha) S^Q        dN^Q/dl = (gamma - alpha) N^Q + alpha/2
    dS^I/dl = -(gamma + alpha) S^I       dN^I/dl = -(gamma + alpha) N^I + alpha/2

Two profiles have closed-form solutions: amplitude restoration
(``gamma = alpha``) and total-power restoration, where the gain keeps the
total power at ``2*nbar + 1``. ``ode_integrate`` is a fixed-step RK4 solver
that serves as the independent check on both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import kernels
from .errors import DomainError
from .holevo import ChannelMatrices
from .link import SignalState
from .shannon import capacity_homodyne

LN2 = math.log(2.0)
DEFAULT_STEP_KM = 0.01

AMPLITUDE = "amplitude"
POWER = "power"
CUSTOM = "custom"


@dataclass(frozen=True)
class GainProfile:
    """Gain density along the link.

    ``kind`` is ``"amplitude"``, ``"power"``, ``"none"`` or ``"custom"``. The
    named kinds carry the parameters the compiled integrator needs;
    ``custom`` profiles are integrated in Python through ``func``.
    """

    func: Callable[[float], float]
    kind: str = CUSTOM
    alpha: float = 0.0
    nbar: float = 0.0
    amp_a: float = 0.0

    def __call__(self, l: float) -> float:
        return self.func(l)


@dataclass(frozen=True)
class ContinuousState:
    """Variances at position ``l`` plus the combined Q power and the constant ``A``."""

    l: float
    s_q: float
    s_i: float
    n_q: float
    n_i: float
    z_q: float
    amp_a: float

    def signal_state(self) -> SignalState:
        return SignalState(self.s_q, self.s_i, self.n_q, self.n_i)


@dataclass(frozen=True)
class OdeDiagnostics:
    steps: int
    step: float
    max_power_drift: float
    min_noise_product: float


def gain_profile_amplitude(alpha: float) -> GainProfile:
    return GainProfile(lambda l: alpha, AMPLITUDE, alpha)


def gain_profile_none() -> GainProfile:
    return GainProfile(lambda l: 0.0, "none")


def _power_a(nbar: float, initial: SignalState | None) -> float:
    if initial is None:
        return 2.0 * nbar
    budget = 2.0 * nbar + 1.0
    if initial.s_i != 0.0 or abs(initial.s_q + initial.n_q + initial.n_i - budget) > 1e-9 * budget:
        raise DomainError("initial state must carry total power 2*nbar + 1 with no I-quadrature signal")
    z0 = initial.s_q + initial.n_q
    return 4.0 * nbar * nbar + 2.0 * nbar - (2.0 * z0 - 1.0 - 2.0 * nbar) ** 2


def gain_profile_power(alpha: float, nbar: float, initial: SignalState | None = None) -> GainProfile:
    """Gain density that holds total power at ``2*nbar + 1``.

    With the default coherent Q-modulated input ``A = 2*nbar``; another
    starting state with the same total power sets ``A`` from its Q power.
    """
    if not nbar > 0.0:
        raise DomainError(f"power-restoration profile needs nbar > 0, got {nbar!r}")
    amp_a = _power_a(nbar, initial)
    c = 4.0 * nbar * nbar + 2.0 * nbar

    def gamma(l: float) -> float:
        return 2.0 * alpha * nbar / math.sqrt(c - amp_a * math.exp(-2.0 * alpha * l))

    return GainProfile(gamma, POWER, alpha, nbar, amp_a)


def _nsteps(length: float, step: float) -> int:
    if length == 0.0:
        return 0
    n = length / step
    r = round(n)
    if r > 0 and abs(n - r) <= 1e-9 * n:
        return int(r)
    return int(math.ceil(n))


def _rk4_python(gamma, alpha, length, nsteps, state):
    h = length / nsteps if nsteps else 0.0
    y = list(state.as_tuple())
    p0 = sum(y)
    drift, prod_min = 0.0, y[2] * y[3]

    def rhs(l, v):
        g = gamma(l)
        return (
            (g - alpha) * v[0],
            -(g + alpha) * v[1],
            (g - alpha) * v[2] + 0.5 * alpha,
            -(g + alpha) * v[3] + 0.5 * alpha,
        )

    for k in range(nsteps):
        l = k * h
        k1 = rhs(l, y)
        k2 = rhs(l + h / 2, [a + h / 2 * b for a, b in zip(y, k1)])
        k3 = rhs(l + h / 2, [a + h / 2 * b for a, b in zip(y, k2)])
        k4 = rhs(l + h, [a + h * b for a, b in zip(y, k3)])
        y = [a + h / 6 * (p + 2 * q + 2 * r + s) for a, p, q, r, s in zip(y, k1, k2, k3, k4)]
        drift = max(drift, abs(sum(y) - p0))
        prod_min = min(prod_min, y[2] * y[3])
    return (*y, drift, prod_min, nsteps)


def integrate_with_diagnostics(profile: GainProfile, state: SignalState, alpha: float, length: float,
                               step: float = DEFAULT_STEP_KM) -> tuple[SignalState, OdeDiagnostics]:
    if not step > 0.0:
        raise DomainError(f"step must be > 0, got {step!r}")
    if length < 0.0 or alpha < 0.0:
        raise DomainError("length and alpha must be >= 0")
    n = _nsteps(length, step)
    if profile.kind in (AMPLITUDE, "none"):
        g0 = alpha if profile.kind == AMPLITUDE else 0.0
        out = kernels.rk4_integrate(kernels.PROFILE_CONSTANT, alpha, g0, 0.0, 0.0, length, n, *state.as_tuple())
    elif profile.kind == POWER and profile.alpha == alpha:
        out = kernels.rk4_integrate(kernels.PROFILE_POWER, alpha, 0.0, profile.nbar, profile.amp_a,
                                    length, n, *state.as_tuple())
    else:
        out = _rk4_python(profile.func, alpha, length, n, state)
    s_q, s_i, n_q, n_i, drift, prod_min, steps = out
    st = SignalState(*(max(float(v), 0.0) for v in (s_q, s_i, n_q, n_i)))
    return st, OdeDiagnostics(int(steps), length / steps if steps else 0.0, float(drift), float(prod_min))


def ode_integrate(profile: GainProfile, state: SignalState, alpha: float, length: float,
                  step: float = DEFAULT_STEP_KM) -> SignalState:
    """Fixed-step RK4 solution of the distributed-amplification equations.

    The step is shrunk to the nearest value dividing ``length`` evenly.
    """
    return integrate_with_diagnostics(profile, state, alpha, length, step)[0]


def state_amplitude_restoration(alpha: float, length: float, nbar: float) -> SignalState:
    al = alpha * length
    return SignalState(2.0 * nbar, 0.0, 0.5 * (1.0 + al), 0.25 * (1.0 + math.exp(-2.0 * al)))


def asymptotic_capacity_amplitude(alpha: float, length: float, nbar: float) -> float:
    """Large-distance homodyne capacity under amplitude restoration, ``2n/(alpha L ln 2)``."""
    return 2.0 * nbar / (alpha * length * LN2)


def integrated_gain_power(alpha: float, l: float, nbar: float, amp_a: float | None = None) -> float:
    """Closed form of the integral of the power-restoration gain density over [0, l].

    With ``c = 4n^2 + 2n`` and ``w(l) = sqrt(c - A exp(-2 alpha l))`` the
    integral is ``(2n/sqrt(c)) * (ln((sqrt(c) + w(l)) / (sqrt(c) + w(0))) + alpha l)``.
    """
    if amp_a is None:
        amp_a = 2.0 * nbar
    c = 4.0 * nbar * nbar + 2.0 * nbar
    sc = math.sqrt(c)
    w0 = math.sqrt(c - amp_a)
    wl = math.sqrt(c - amp_a * math.exp(-2.0 * alpha * l))
    return 2.0 * nbar / sc * (math.log((sc + wl) / (sc + w0)) + alpha * l)


def exact_state_power(alpha: float, l: float, nbar: float, initial: SignalState | None = None) -> ContinuousState:
    """Variances at ``l`` under the power-restoration profile.

    For coherent Q-modulated input the Q signal follows the closed form with
    the bracketed ratio raised to ``sqrt(nbar/(4 nbar + 2))``, evaluated in log
    space. Other initial states (same total power) use the integrated gain.
    """
    if not nbar > 0.0:
        raise DomainError(f"nbar must be > 0, got {nbar!r}")
    if l < 0.0:
        raise DomainError(f"position must be >= 0, got {l!r}")
    amp_a = _power_a(nbar, initial)
    c = 4.0 * nbar * nbar + 2.0 * nbar
    e = math.exp(-2.0 * alpha * l)
    root = math.sqrt(c - amp_a * e)
    assert c - amp_a * e >= 0.0
    z_q = 0.5 * (1.0 + 2.0 * nbar + root)
    budget = 2.0 * nbar + 1.0
    if initial is None:
        # N^I = (budget - root)/2, rewritten without cancellation
        n_i = 0.5 * (budget * budget - (c - amp_a * e)) / (budget + root)
        s_q = _sq_coherent(alpha, l, nbar)
    else:
        n_i = budget - z_q
        s_q = initial.s_q * math.exp(integrated_gain_power(alpha, l, nbar, amp_a) - alpha * l)
    return ContinuousState(l, s_q, 0.0, z_q - s_q, n_i, z_q, amp_a)


def _sq_coherent(alpha: float, l: float, nbar: float) -> float:
    if l == 0.0:
        return 2.0 * nbar
    u1 = (1.0 + 2.0 * nbar) / (2.0 * nbar)
    su1 = math.sqrt(u1)
    e = math.exp(-2.0 * alpha * l)
    su2 = math.sqrt((1.0 + 2.0 * nbar) / (2.0 * nbar + 1.0 - e))
    # |1 - sqrt(u)| = |1 - u| / (1 + sqrt(u)); |1 - u1| = 1/(2n), |1 - u2| = e/(2n + 1 - e)
    log_ratio = (
        -math.log(2.0 * nbar) - 2.0 * math.log1p(su1)
        + 2.0 * math.log1p(su2) + 2.0 * alpha * l + math.log(2.0 * nbar + 1.0 - e)
    )
    exponent = math.sqrt(nbar / (4.0 * nbar + 2.0))
    return 2.0 * nbar * math.exp(-alpha * l + exponent * log_ratio)


def capacity_power_approx(alpha: float, length: float, nbar: float) -> float:
    e = math.exp(-alpha * length / (4.0 * nbar + 1.0))
    return capacity_homodyne(4.0 * nbar * e / (4.0 * nbar * (1.0 - e) + 1.0))


def asymptotic_capacity_power(alpha: float, length: float, nbar: float) -> float:
    """Large-distance form of the power-restoration capacity."""
    k = 4.0 * nbar + 1.0
    return 2.0 * nbar / (k * LN2) * math.exp(-alpha * length / k)


def large_n_state_power(alpha: float, l: float, nbar: float) -> SignalState:
    """Leading terms of the power-restoration solution for strong signals, at position ``l``."""
    al = alpha * l
    e = math.exp(-2.0 * al)
    return SignalState(max(2.0 * nbar - 0.5 * al + 0.25 * (1.0 - e), 0.0), 0.0,
                       0.5 * (1.0 + al), 0.25 * (1.0 + e))


def log_power_gains(regime: str, alpha: float, length: float, nbar: float) -> tuple[float, float]:
    """Natural logs of the net Q and I variance multipliers of a distributed link."""
    al = alpha * length
    if regime == AMPLITUDE:
        return 0.0, -2.0 * al
    if regime == POWER:
        gint = integrated_gain_power(alpha, length, nbar)
        return gint - al, -gint - al
    raise DomainError(f"unknown regime {regime!r}")


def continuous_channel(regime: str, alpha: float, length: float, nbar: float) -> ChannelMatrices:
    """Channel matrices of a distributed-amplification link.

    The power-restoration profile depends on ``nbar``; the amplitude one
    does not.
    """
    log_gq, log_gi = log_power_gains(regime, alpha, length, nbar)
    out = output_state(regime, alpha, length, nbar)
    gq, gi = math.exp(log_gq), math.exp(log_gi)
    # coherent input carries 1/2 vacuum in each quadrature; remove its share
    nq = max(out.n_q - 0.5 * gq, 0.0)
    ni = max(out.n_i - 0.5 * gi, 0.0)
    return ChannelMatrices((math.exp(0.5 * log_gq), math.exp(0.5 * log_gi)), (nq, ni))


def output_state(regime: str, alpha: float, length: float, nbar: float,
                 state: SignalState | None = None) -> SignalState:
    """Output of a distributed link for an arbitrary input (coherent Q input by default)."""
    if state is None:
        if regime == AMPLITUDE:
            return state_amplitude_restoration(alpha, length, nbar)
        return exact_state_power(alpha, length, nbar).signal_state()
    return continuous_channel(regime, alpha, length, nbar).apply(state)
