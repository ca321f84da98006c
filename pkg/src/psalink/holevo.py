"""Gordon-Holevo capacity of single-mode phase-sensitive Gaussian channels.

A diagonal channel ``Sigma_out = X Sigma_in X^T + Y`` with
``X = diag(x1, x2)`` and ``Y = diag(y1, y2)`` is reduced to its fiducial form
``(tau, y, omega)``: ``tau = x1*x2``, ``y = sqrt(y1*y2)`` and
``Y = y * diag((x1/x2)/omega, (x2/x1)*omega)``. Squeezing the output into
``X = sqrt(tau) * I`` leaves the capacity unchanged and turns the noise into
``y * diag(1/omega, omega)``.

The closed forms used below modulate the second fiducial quadrature, which
is only the quiet one when ``omega <= 1``. Parameters with ``omega > 1`` are
therefore mapped to ``1/omega`` (a quarter-turn phase rotation at input and
output, which preserves energy and capacity) before any branch is evaluated.
Results are reported back in the caller's frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DegenerateChannelError, DomainError, NumericalFailure, PreconditionError
from .link import LinkPlan, SignalState, additive_noise_of_link, power_gains

LN2 = math.log(2.0)

ABOVE = "above-threshold"
BELOW = "below-threshold"
COHERENT = "coherent-forced"

RESIDUAL_TOL = 1e-10
MAX_BISECTIONS = 200
SCAN_POINTS = 64


def g_function(x: float) -> float:
    """Entropy in bits of a thermal state with mean photon number ``x``."""
    if x < 0.0:
        raise DomainError(f"g is defined for x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < 1e-12:
        return x * math.log2(math.e / x)
    return (math.log1p(x) + x * math.log1p(1.0 / x)) / LN2


def g_prime(x: float) -> float:
    if not x > 0.0:
        raise DomainError(f"g' is defined for x > 0, got {x!r}")
    return math.log1p(1.0 / x) / LN2


def _g(x: float) -> float:
    # symplectic offsets can come out a few ulp below zero
    return g_function(x if x > 0.0 else 0.0)


def _gp(x: float) -> float:
    return g_prime(x if x > 1e-300 else 1e-300)


@dataclass(frozen=True)
class ChannelMatrices:
    """Diagonal Gaussian channel: amplitude factors ``x_diag`` and added noise ``y_diag``."""

    x_diag: tuple[float, float]
    y_diag: tuple[float, float]

    def __post_init__(self):
        x1, x2 = self.x_diag
        y1, y2 = self.y_diag
        if not (x1 > 0.0 and x2 > 0.0):
            raise DomainError(f"amplitude factors must be > 0, got {self.x_diag}")
        if not (y1 >= 0.0 and y2 >= 0.0):
            raise DomainError(f"added noise must be >= 0, got {self.y_diag}")

    @classmethod
    def from_power_gains(cls, gain_q: float, gain_i: float, noise_q: float, noise_i: float) -> "ChannelMatrices":
        return cls((math.sqrt(gain_q), math.sqrt(gain_i)), (noise_q, noise_i))

    @classmethod
    def from_link(cls, plan: LinkPlan) -> "ChannelMatrices":
        gq, gi = power_gains(plan)
        nq, ni = additive_noise_of_link(plan)
        return cls.from_power_gains(gq, gi, nq, ni)

    @property
    def det_x(self) -> float:
        return self.x_diag[0] * self.x_diag[1]

    @property
    def det_y(self) -> float:
        return self.y_diag[0] * self.y_diag[1]

    def is_physical(self, tol: float = 1e-12) -> bool:
        """Complete-positivity test ``det Y >= ((1 - det X)/2)**2``."""
        return math.sqrt(self.det_y) >= 0.5 * abs(1.0 - self.det_x) - tol

    def apply(self, state: SignalState) -> SignalState:
        x1s = self.x_diag[0] ** 2
        x2s = self.x_diag[1] ** 2
        return SignalState(x1s * state.s_q, x2s * state.s_i,
                           x1s * state.n_q + self.y_diag[0], x2s * state.n_i + self.y_diag[1])


@dataclass(frozen=True)
class FiducialParams:
    tau: float
    y: float
    omega: float

    def __post_init__(self):
        if not self.y >= 0.0:
            raise DomainError(f"y must be >= 0, got {self.y!r}")
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be finite and > 0, got {self.omega!r}")

    def noise_diag(self, x_ratio: float) -> tuple[float, float]:
        """Rebuild the noise diagonal for amplitude ratio ``x1/x2``."""
        return (self.y * x_ratio / self.omega, self.y * self.omega / x_ratio)

    def canonical(self) -> tuple["FiducialParams", bool]:
        """Equivalent parameters with ``omega <= 1`` and whether a swap happened."""
        if self.omega > 1.0:
            return replace(self, omega=1.0 / self.omega), True
        return self, False


@dataclass(frozen=True)
class GhResult:
    """Outcome of a Gordon-Holevo evaluation.

    ``omega_in`` and ``wbar_in`` describe the optimal input (squeezing of the
    modulated states and shape of the averaged state); ``m_out`` and
    ``mbar_out`` are the output symplectic-eigenvalue offsets whose entropies
    give the capacity.
    """

    capacity: float
    regime: str
    omega_in: float
    wbar_in: float
    m_out: float
    mbar_out: float
    fiducial: FiducialParams | None = None
    threshold: float = math.nan
    residual: float = 0.0
    iterations: int = 0


def compute_fiducial(ch: ChannelMatrices) -> FiducialParams:
    x1, x2 = ch.x_diag
    y1, y2 = ch.y_diag
    tau = x1 * x2
    if not (tau > 0.0 and math.isfinite(tau)):
        raise DomainError(f"det X = {tau!r} is outside floating-point range")
    if y1 == 0.0 and y2 == 0.0:
        return FiducialParams(tau, 0.0, 1.0)
    if y1 == 0.0 or y2 == 0.0:
        raise DegenerateChannelError("added noise vanishes in exactly one quadrature")
    omega = (x1 / x2) * math.sqrt(y2 / y1)
    if not (omega > 0.0 and math.isfinite(omega)):
        raise DomainError(f"omega = {omega!r} is outside floating-point range")
    return FiducialParams(tau, math.sqrt(y1 * y2), omega)


def threshold_energy(f: FiducialParams) -> float:
    """Input energy above which squeezed-state modulation of both quadratures is optimal."""
    if f.tau == 0.0:
        raise DomainError("threshold undefined for tau = 0")
    om = min(f.omega, 1.0 / f.omega)
    return (1.0 + f.y / abs(f.tau) * abs(1.0 - om * om)) / (2.0 * om) - 0.5


def capacity_above_threshold(f: FiducialParams, nbar: float) -> GhResult:
    thr = threshold_energy(f)
    if nbar < thr:
        raise PreconditionError(f"nbar={nbar!r} lies below the threshold {thr!r}")
    t, y, om = abs(f.tau), f.y, f.omega
    mbar = t * (nbar + 0.5) + 0.5 * (y * (1.0 / om + om) - 1.0)
    m = 0.5 * t + y - 0.5
    skew = y * (1.0 / om - om)
    top = t * (2.0 * nbar + 1.0)
    wbar_in = math.sqrt((top + skew) / (top - skew)) if top > abs(skew) else 1.0
    cap = max(_g(mbar) - _g(m), 0.0)
    return GhResult(cap, ABOVE, om, wbar_in, max(m, 0.0), max(mbar, 0.0), f, thr)


def _below_terms(t, y, om, nbar, w_in):
    """Output variances for single-quadrature modulation in the canonical frame."""
    a = t / (2.0 * w_in) + y / om
    b = t * w_in / 2.0 + y * om
    bbar = t * (2.0 * nbar + 1.0 - 1.0 / (2.0 * w_in)) + y * om
    return a, b, bbar


def _residual_canonical(t, y, om, nbar, w_in):
    a, b, bbar = _below_terms(t, y, om, nbar, w_in)
    m = math.sqrt(a * b) - 0.5
    mbar = math.sqrt(a * bbar) - 0.5
    w_out = math.sqrt(b / a)
    wbar_out = math.sqrt(bbar / a)
    lhs = _gp(mbar) * LN2 / wbar_out * (1.0 - wbar_out * wbar_out)
    rhs = _gp(m) * LN2 / w_out * (w_in * w_in - w_out * w_out)
    return lhs - rhs


def transcendental_residual(f: FiducialParams, nbar: float, omega_in: float) -> float:
    """Residual of the stationarity condition for the input squeezing ``omega_in``.

    ``omega_in`` is taken in the frame of ``f``. Positive values mean the
    capacity still grows with the squeezing of the modulated quadrature.
    """
    c, swapped = f.canonical()
    w = 1.0 / omega_in if swapped else omega_in
    return _residual_canonical(abs(c.tau), c.y, c.omega, nbar, w)


def _feasible_squeezing(nbar: float) -> tuple[float, float]:
    # roots of w^2 - 2(2n+1) w + 1: the averaged state must dominate the modulated one
    p = 2.0 * nbar + 1.0
    root = 2.0 * math.sqrt(nbar * (nbar + 1.0))
    return 1.0 / (p + root), p + root


def capacity_below_threshold(f: FiducialParams, nbar: float) -> GhResult:
    """Optimal squeezed single-quadrature modulation below the threshold energy.

    The stationarity condition in ``omega_in`` is bracketed by a log-spaced
    scan of the physical interval and then refined by bisection.
    """
    thr = threshold_energy(f)
    if not 0.0 <= nbar < thr:
        raise PreconditionError(f"nbar={nbar!r} must satisfy 0 <= nbar < threshold {thr!r}")
    c, swapped = f.canonical()
    t, y, om = abs(c.tau), c.y, c.omega
    if nbar == 0.0:
        m = math.sqrt((t / 2.0 + y / om) * (t / 2.0 + y * om)) - 0.5
        return GhResult(0.0, BELOW, 1.0, 1.0, max(m, 0.0), max(m, 0.0), f, thr)

    w_lo, w_hi = _feasible_squeezing(nbar)
    u_lo, u_hi = math.log(w_lo), math.log(w_hi)
    grid = [math.exp(u_lo + (u_hi - u_lo) * k / SCAN_POINTS) for k in range(SCAN_POINTS + 1)]
    grid[0], grid[-1] = w_lo, w_hi
    vals = []
    for w in grid:
        try:
            vals.append(_residual_canonical(t, y, om, nbar, w))
        except (ValueError, ZeroDivisionError):
            vals.append(math.nan)
    bracket = None
    for k in range(SCAN_POINTS):
        if vals[k] > 0.0 and vals[k + 1] <= 0.0:
            bracket = (grid[k], grid[k + 1], vals[k])
            break
    if bracket is None:
        raise NumericalFailure("no sign change of the stationarity residual", interval=(w_lo, w_hi))

    lo, hi, _ = bracket
    best_w, best_r = lo, math.inf
    it = 0
    for it in range(1, MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + hi)
        r = _residual_canonical(t, y, om, nbar, mid)
        if abs(r) < abs(best_r):
            best_w, best_r = mid, r
        if abs(r) < 1e-13 or mid in (lo, hi):
            break
        if r > 0.0:
            lo = mid
        else:
            hi = mid

    w_in = best_w
    a, b, bbar = _below_terms(t, y, om, nbar, w_in)
    m = math.sqrt(a * b) - 0.5
    mbar = math.sqrt(a * bbar) - 0.5
    wbar_in = math.sqrt(max(2.0 * (2.0 * nbar + 1.0) * w_in - 1.0, 0.0))
    if swapped:
        w_in, wbar_in = 1.0 / w_in, (1.0 / wbar_in if wbar_in > 0 else math.inf)
    cap = max(_g(mbar) - _g(m), 0.0)
    return GhResult(cap, BELOW, w_in, wbar_in, max(m, 0.0), max(mbar, 0.0), f, thr, best_r, it)


def _coherent(f: FiducialParams, nbar: float) -> GhResult:
    """Coherent-state inputs, modulation split between quadratures optimally.

    Equalising the two averaged output variances is optimal when the budget
    allows it; otherwise everything goes on the quiet quadrature, which is the
    ``omega_in = 1`` single-quadrature expression.
    """
    c, swapped = f.canonical()
    t, y, om = abs(c.tau), c.y, c.omega
    noisy = t / 2.0 + y / om
    quiet = t / 2.0 + y * om
    m = math.sqrt(noisy * quiet) - 0.5
    gap = y * (1.0 / om - om) / t
    if gap <= 2.0 * nbar:
        mbar = 0.5 * (t * (2.0 * nbar + 1.0) + y * (om + 1.0 / om)) - 0.5
        s_quiet = nbar + 0.5 * gap
        s_noisy = nbar - 0.5 * gap
        wbar_in = math.sqrt((0.5 + s_quiet) / (0.5 + s_noisy))
    else:
        mbar = math.sqrt(noisy * (quiet + 2.0 * nbar * t)) - 0.5
        wbar_in = math.sqrt(4.0 * nbar + 1.0)
    if swapped:
        wbar_in = 1.0 / wbar_in
    cap = max(_g(mbar) - _g(m), 0.0)
    return GhResult(cap, COHERENT, 1.0, wbar_in, max(m, 0.0), max(mbar, 0.0), f)


def capacity_coherent(f: FiducialParams, nbar: float) -> float:
    if not nbar >= 0.0:
        raise DomainError(f"nbar must be >= 0, got {nbar!r}")
    if f.y == 0.0:
        return g_function(abs(f.tau) * nbar)
    return _coherent(f, nbar).capacity


def gh_capacity(ch: ChannelMatrices, nbar: float, mode: str = "optimal") -> GhResult:
    """Gordon-Holevo capacity of a diagonal channel for mean input photon number ``nbar``.

    ``mode`` is ``"optimal"`` (optimised Gaussian ensemble) or ``"coherent"``
    (coherent-state inputs only).
    """
    if not nbar >= 0.0:
        raise DomainError(f"nbar must be >= 0, got {nbar!r}")
    if mode not in ("optimal", "coherent"):
        raise DomainError(f"unknown mode {mode!r}")
    if not ch.is_physical(tol=1e-9 * max(1.0, math.sqrt(ch.det_y))):
        raise DomainError("channel violates complete positivity (det Y < ((1 - det X)/2)^2)")
    f = compute_fiducial(ch)
    if f.y == 0.0:
        cap = g_function(abs(f.tau) * nbar)
        regime = COHERENT if mode == "coherent" else ABOVE
        return GhResult(cap, regime, 1.0, 1.0, 0.0, abs(f.tau) * nbar, f, 0.0)
    if mode == "coherent":
        return replace(_coherent(f, nbar), threshold=threshold_energy(f))
    thr = threshold_energy(f)
    if nbar >= thr:
        return capacity_above_threshold(f, nbar)
    return capacity_below_threshold(f, nbar)


def inline_fiducial(plan: LinkPlan) -> FiducialParams:
    """Fiducial parameters from the shortcut expressions quoted alongside the matrix definitions.

    ``tau = tau_tot*G_tot``, ``y = sqrt(N^Q N^I)`` and
    ``omega = sqrt(tau_final^2 N^I / (tau^2 N^Q))`` with the link's added
    noise. Kept only as a diagnostic: it disagrees with ``det X`` whenever
    ``G_tot != 1``.
    """
    nq, ni = additive_noise_of_link(plan)
    gq, _ = power_gains(plan)
    tau = gq
    tau_final = float(plan.taus[-1])
    omega = math.sqrt(tau_final ** 2 * ni / (tau ** 2 * nq)) if nq > 0 else 1.0
    return FiducialParams(tau, math.sqrt(nq * ni), omega)
