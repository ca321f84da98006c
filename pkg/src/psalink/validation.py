"""Cross-checks between independent computations of the same quantities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import continuous
from .holevo import ChannelMatrices, compute_fiducial, g_function, gh_capacity, inline_fiducial
from .link import LinkPlan, SignalState, propagate_link
from .montecarlo import simulate_link
from .optimize import (OptimizationProblem, feasibility_check, gains_amplitude_restoration,
                       link_capacity, optimize)


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    diagnostics: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_ode(tol: float) -> Check:
    """Closed-form distributed-link states against fixed-step RK4."""
    worst = 0.0
    alpha = 0.05
    for nbar in (1.0, 100.0):
        for length in (10.0, 100.0):
            start = SignalState.coherent_q(nbar)
            ode = continuous.ode_integrate(continuous.gain_profile_amplitude(alpha), start, alpha, length)
            ref = continuous.state_amplitude_restoration(alpha, length, nbar)
            worst = max(worst, *(_rel(a, b) for a, b in zip(ode.as_tuple(), ref.as_tuple()) if b))
            ode = continuous.ode_integrate(continuous.gain_profile_power(alpha, nbar), start, alpha, length)
            ref = continuous.exact_state_power(alpha, length, nbar).signal_state()
            worst = max(worst, *(_rel(a, b) for a, b in zip(ode.as_tuple(), ref.as_tuple()) if b))
    return Check("closed-form-vs-ode", worst, tol, worst <= tol, "max relative error")


def check_montecarlo(sigmas: float, count: int = 200_000, seed: int = 20240607) -> Check:
    """Analytic output variances against a sampled 10-amplifier link."""
    pos = [100.0 * (i + 1) / 11 for i in range(10)]
    plan = LinkPlan(0.05, 100.0, pos, gains_amplitude_restoration(pos, 0.05))
    state = SignalState.coherent_split(10.0)
    ref = propagate_link(plan, state).as_tuple()
    est, err = simulate_link(plan, state, count, seed)
    z = max(abs(e - r) / s for e, r, s in zip(est.as_tuple(), ref, err.as_tuple()))
    return Check("analytic-vs-montecarlo", z, sigmas, z <= sigmas, "max |z| over four variances")


def check_optimizer(tol: float, points: int = 4000) -> Check:
    """Power-restoration optimum for one amplifier against a dense gain grid."""
    alpha, length, nbar = 0.05, 100.0, 100.0
    res = optimize(OptimizationProblem(alpha, length, 1, nbar, "power"))
    plan = LinkPlan.equally_spaced(alpha, length, 1)
    best = -math.inf
    for g in np.exp(np.linspace(0.0, math.log(4.0 * nbar + 2.0), points)):
        p = plan.with_gains([g])
        if feasibility_check(p, SignalState.coherent_q(nbar)) >= -1e-9:
            best = max(best, link_capacity(p, nbar))
    # only a shortfall of the optimizer counts against it
    shortfall = max(0.0, (best - res.capacity) / best)
    return Check("optimizer-vs-grid", shortfall, tol, shortfall <= tol, "relative capacity shortfall")


def check_pure_loss(tol: float) -> Check:
    worst = 0.0
    for tau in (0.01, 0.1, 0.5, 0.9, 1.0):
        ch = ChannelMatrices.from_power_gains(tau, tau, 0.5 * (1 - tau), 0.5 * (1 - tau))
        for nbar in (0.1, 1.0, 10.0, 100.0):
            worst = max(worst, abs(gh_capacity(ch, nbar).capacity - g_function(tau * nbar)))
    return Check("pure-loss-collapse", worst, tol, worst <= tol, "max absolute error in bits")


def fiducial_discrepancy() -> dict[str, float]:
    """Fiducial parameters of a 10-amplifier link from the matrices and from the shortcut."""
    pos = [100.0 * (i + 1) / 11 for i in range(10)]
    plan = LinkPlan(0.05, 100.0, pos, gains_amplitude_restoration(pos, 0.05))
    m = compute_fiducial(ChannelMatrices.from_link(plan))
    s = inline_fiducial(plan)
    return {"tau_matrix": m.tau, "tau_inline": s.tau, "omega_matrix": m.omega, "omega_inline": s.omega,
            "y_matrix": m.y, "y_inline": s.y}


def run(tolerances: dict[str, float]) -> Report:
    rep = Report()
    rep.checks.append(check_ode(tolerances["ode_rel_tol"]))
    rep.checks.append(check_montecarlo(tolerances["mc_sigmas"]))
    rep.checks.append(check_optimizer(tolerances["grid_rel_tol"]))
    rep.checks.append(check_pure_loss(tolerances["pure_loss_tol"]))
    rep.diagnostics = fiducial_discrepancy()
    return rep
