"""Choice of amplifier gains and positions under two constraint regimes.

``amplitude``: every amplifier restores the Q amplitude, ``G_i = 1/tau_i``.

``power``: total power after every amplifier stays at or below ``2*nbar + 1``.
Given the upstream gains, the feasible values of one gain form an interval,
so each gain is written as a point ``theta`` in [0, 1] on a log scale inside
its interval. The search runs over that box with coordinate descent and a
golden-section line search per coordinate; feasibility holds by
construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, InfeasibleError
from .holevo import ChannelMatrices, gh_capacity
from .link import EnergyBudget, LinkPlan, SignalState, node_powers
from .shannon import capacity_homodyne

AMPLITUDE = "amplitude"
POWER = "power"
REGIMES = (AMPLITUDE, POWER)
OBJECTIVES = ("homodyne", "gh-coherent", "gh-optimal")
POSITIONS = ("equal", "free")

CAPACITY_TOL = 1e-9
SLACK_TOL = 1e-9
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_EMPTY = np.zeros(0)
_ALIASES = {
    "amplitude-restoration": AMPLITUDE,
    "power-restoration": POWER,
    "fixed-equal-spacing": "equal",
}


@dataclass(frozen=True)
class OptimizationProblem:
    alpha: float
    total_length: float
    amp_count: int
    budget: EnergyBudget
    regime: str = AMPLITUDE
    objective: str = "homodyne"
    positions: str = "equal"
    max_passes: int = 60

    def __post_init__(self):
        if not isinstance(self.budget, EnergyBudget):
            object.__setattr__(self, "budget", EnergyBudget(float(self.budget)))
        for name in ("regime", "positions"):
            v = getattr(self, name)
            object.__setattr__(self, name, _ALIASES.get(v, v))
        if self.amp_count < 0:
            raise DomainError("amp_count must be >= 0")
        if self.regime not in REGIMES:
            raise DomainError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.objective not in OBJECTIVES:
            raise DomainError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.positions not in POSITIONS:
            raise DomainError(f"positions must be one of {POSITIONS}, got {self.positions!r}")
        if not (self.total_length > 0.0 and self.alpha >= 0.0):
            raise DomainError("need total_length > 0 and alpha >= 0")

    @property
    def nbar(self) -> float:
        return self.budget.nbar


@dataclass(frozen=True)
class OptimizationResult:
    plan: LinkPlan
    capacity: float
    feasibility_margin: float
    iterations: int
    converged: bool
    evaluations: int = 0


def gains_amplitude_restoration(positions: Sequence[float], alpha: float) -> list[float]:
    edges = np.concatenate(([0.0], np.asarray(positions, dtype=float)))
    return [math.exp(alpha * d) for d in np.diff(edges)]


def feasibility_check(plan: LinkPlan, state: SignalState) -> float:
    """Smallest slack ``(2n+1) - total power`` over amplifier outputs and the link output."""
    budget = 2.0 * state.nbar + 1.0
    return float(budget - node_powers(plan, state).max())


def link_capacity(plan: LinkPlan, nbar: float, objective: str = "homodyne") -> float:
    """Capacity of a fixed plan for coherent Q-modulated input with ``nbar`` photons."""
    taus, gains = plan.taus, plan.gains_array
    return _capacity_from_arrays(taus, gains, nbar, objective)


def _capacity_from_arrays(taus, gains, nbar, objective):
    if objective == "homodyne":
        s_q, _, n_q, _ = kernels.fold_link(taus, gains, 2.0 * nbar, 0.0, 0.5, 0.5, _EMPTY)
        return capacity_homodyne(s_q / n_q)
    gq, gi, _, _ = kernels.fold_link(taus, gains, 1.0, 1.0, 0.0, 0.0, _EMPTY)
    _, _, yq, yi = kernels.fold_link(taus, gains, 0.0, 0.0, 0.0, 0.0, _EMPTY)
    ch = ChannelMatrices.from_power_gains(gq, gi, yq, yi)
    mode = "coherent" if objective == "gh-coherent" else "optimal"
    return gh_capacity(ch, nbar, mode).capacity


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-9,
                       max_iter: int = 200) -> tuple[float, float, int]:
    """Maximise a unimodal ``f`` on [lo, hi]; endpoints are checked too.

    Returns ``(x, f(x), evaluations)``.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol * max(1.0, abs(a) + abs(b)) and n < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        n += 1
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    for x in (lo, hi):
        fx = f(x)
        n += 1
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f, n


class _PowerGainSearch:
    """Coordinate descent over the box coordinates of power-feasible gains."""

    def __init__(self, taus, nbar, objective):
        self.taus = np.ascontiguousarray(taus, dtype=float)
        self.nbar = nbar
        self.objective = objective
        self.budget = 2.0 * nbar + 1.0
        self.gains = np.zeros(len(taus) - 1)
        self.evaluations = 0

    def value(self, theta):
        out = kernels.project_gains(self.taus, theta, 2.0 * self.nbar, 0.0, 0.5, 0.5, self.budget, self.gains)
        self.evaluations += 1
        if self.objective == "homodyne":
            return capacity_homodyne(out[0] / out[2])
        return _capacity_from_arrays(self.taus, self.gains, self.nbar, self.objective)

    def gains_for(self, theta):
        kernels.project_gains(self.taus, theta, 2.0 * self.nbar, 0.0, 0.5, 0.5, self.budget, self.gains)
        return self.gains.copy()

    def run(self, theta=None, max_passes=60):
        r = len(self.taus) - 1
        theta = np.ones(r) if theta is None else np.array(theta, dtype=float)
        best = self.value(theta)
        passes, converged = 0, r == 0
        while passes < max_passes and not converged:
            passes += 1
            start = best
            for k in range(r):
                def f(x, k=k):
                    theta[k] = x
                    return self.value(theta)

                old = theta[k]
                x, fx, _ = golden_section_max(f, 0.0, 1.0)
                if fx > best:
                    theta[k], best = x, fx
                else:
                    theta[k] = old
            converged = best - start <= CAPACITY_TOL
        return theta, best, passes, converged


def _equal_positions(problem):
    n = problem.amp_count
    return [problem.total_length * (i + 1) / (n + 1) for i in range(n)]


def _taus_for(alpha, length, positions):
    edges = np.concatenate(([0.0], np.asarray(positions, dtype=float), [length]))
    return np.ascontiguousarray(np.exp(-alpha * np.diff(edges)))


def _solve_gains(problem, positions, theta=None):
    """Best gains for fixed positions: ``(gains, capacity, theta, passes, converged, evals)``."""
    if problem.regime == AMPLITUDE:
        gains = gains_amplitude_restoration(positions, problem.alpha)
        taus = _taus_for(problem.alpha, problem.total_length, positions)
        cap = _capacity_from_arrays(taus, np.asarray(gains), problem.nbar, problem.objective)
        return gains, cap, None, 0, True, 1
    search = _PowerGainSearch(_taus_for(problem.alpha, problem.total_length, positions),
                              problem.nbar, problem.objective)
    theta, cap, passes, conv = search.run(theta, problem.max_passes)
    return list(search.gains_for(theta)), cap, theta, passes, conv, search.evaluations


def optimize(problem: OptimizationProblem) -> OptimizationResult:
    """Best plan for the problem's regime, objective and position mode.

    Deterministic: no randomness is involved, so identical problems give
    identical results. Non-convergence within ``max_passes`` is reported via
    ``converged=False`` with the best plan found.
    """
    positions = _equal_positions(problem)
    gains, cap, theta, passes, converged, evals = _solve_gains(problem, positions)

    if problem.positions == "free" and problem.amp_count > 0:
        L = problem.total_length
        outer = 0
        converged = False
        while outer < problem.max_passes and not converged:
            outer += 1
            start = cap
            for k in range(problem.amp_count):
                lo = positions[k - 1] if k > 0 else 0.0
                hi = positions[k + 1] if k + 1 < problem.amp_count else L
                eps = 1e-9 * L
                cache = {}

                def f(x, k=k):
                    trial = list(positions)
                    trial[k] = x
                    res = _solve_gains(problem, trial, theta)
                    cache[x] = res
                    return res[1]

                upper = hi if k + 1 == problem.amp_count else hi - eps
                x, fx, _ = golden_section_max(f, lo + eps, upper, tol=1e-7)
                evals += sum(r[5] for r in cache.values())
                if fx > cap:
                    positions[k] = x
                    gains, cap, theta = cache[x][0], fx, cache[x][2]
            converged = cap - start <= CAPACITY_TOL
        passes += outer

    plan = LinkPlan(problem.alpha, problem.total_length, tuple(positions), tuple(gains))
    margin = feasibility_check(plan, SignalState.coherent_q(problem.nbar))
    if problem.regime == POWER and margin < -SLACK_TOL * (2.0 * problem.nbar + 1.0):
        raise InfeasibleError("power constraint violated by the best plan found", margin)
    return OptimizationResult(plan, cap, margin, passes, converged, evals)
