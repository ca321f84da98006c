import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psalink.continuous import output_state
from psalink.errors import DomainError
from psalink.link import LinkPlan, SignalState, node_powers, propagate_link
from psalink.optimize import (OptimizationProblem, feasibility_check, gains_amplitude_restoration,
                              golden_section_max, link_capacity, optimize)
from psalink.shannon import capacity_homodyne


def grid_best(alpha, length, nbar, r, n):
    """Exhaustive search over log-spaced gains with equally spaced amplifiers."""
    pos = tuple(length * (i + 1) / (r + 1) for i in range(r))
    s = SignalState.coherent_q(nbar)
    budget = 2 * nbar + 1
    best = -1.0
    for g in itertools.product(np.exp(np.linspace(-3, 6, n)), repeat=r):
        plan = LinkPlan(alpha, length, pos, g)
        if node_powers(plan, s).max() > budget * (1 + 1e-12):
            continue
        out = propagate_link(plan, s)
        best = max(best, capacity_homodyne(out.s_q / out.n_q))
    return best


def test_amplitude_gain_example():
    assert gains_amplitude_restoration([20.0], 0.05) == [pytest.approx(math.e, rel=1e-15)]
    assert gains_amplitude_restoration([10.0, 30.0], 0.0) == [1.0, 1.0]
    res = optimize(OptimizationProblem(0.05, 60, 2, 10.0))
    assert res.plan.amp_gains == pytest.approx((math.e, math.e), rel=1e-14)


def test_lossless_fibre_needs_no_gain():
    for regime in ("amplitude", "power"):
        res = optimize(OptimizationProblem(0.0, 100, 3, 10.0, regime=regime))
        assert res.plan.amp_gains == pytest.approx((1.0,) * 3, rel=1e-6)
        assert res.capacity == pytest.approx(capacity_homodyne(40.0), rel=1e-9)


def test_no_amplifiers_is_pure_loss():
    for regime in ("amplitude", "power"):
        res = optimize(OptimizationProblem(0.05, 100, 0, 100.0, regime=regime))
        tau = math.exp(-5)
        assert res.capacity == pytest.approx(capacity_homodyne(400 * tau), rel=1e-14)
        assert res.plan.amp_count == 0


@pytest.mark.parametrize("r,n", [(1, 2000), (2, 150)])
@pytest.mark.parametrize("nbar", [1.0, 100.0])
def test_power_regime_beats_grid(r, n, nbar):
    res = optimize(OptimizationProblem(0.05, 100, r, nbar, regime="power"))
    assert res.capacity >= grid_best(0.05, 100, nbar, r, n) * (1 - 1e-3)
    assert res.feasibility_margin >= -1e-9 * (2 * nbar + 1)
    assert res.converged


def test_power_constraint_is_active():
    res = optimize(OptimizationProblem(0.05, 100, 1, 100.0, regime="power"))
    assert res.feasibility_margin == pytest.approx(0.0, abs=1e-9 * 201)
    assert feasibility_check(res.plan, SignalState.coherent_q(100)) == res.feasibility_margin


def test_capacity_between_no_amps_and_continuous():
    nbar, length = 100.0, 500
    for regime in ("amplitude", "power"):
        caps = [optimize(OptimizationProblem(0.05, length, r, nbar, regime=regime)).capacity
                for r in (0, 1, 3, 10, 30)]
        assert caps == sorted(caps)
        ideal = output_state(regime, 0.05, length, nbar)
        assert caps[-1] < capacity_homodyne(ideal.s_q / ideal.n_q)


def test_free_positions_not_worse_than_equal():
    for regime in ("amplitude", "power"):
        eq = optimize(OptimizationProblem(0.05, 200, 3, 10.0, regime=regime))
        free = optimize(OptimizationProblem(0.05, 200, 3, 10.0, regime=regime, positions="free"))
        assert free.capacity >= eq.capacity - 1e-12
        if regime == "power":
            assert free.feasibility_margin >= -1e-9 * 21


def test_gh_objectives():
    res = {obj: optimize(OptimizationProblem(0.05, 100, 2, 10.0, regime="power", objective=obj)).capacity
           for obj in ("homodyne", "gh-coherent", "gh-optimal")}
    assert res["homodyne"] <= res["gh-coherent"] * (1 + 1e-9)
    assert res["gh-coherent"] <= res["gh-optimal"] * (1 + 1e-9)


def test_deterministic():
    p = OptimizationProblem(0.05, 150, 3, 20.0, regime="power", positions="free")
    assert optimize(p) == optimize(p)


def test_aliases_and_validation():
    p = OptimizationProblem(0.05, 100, 1, 1.0, regime="power-restoration", positions="fixed-equal-spacing")
    assert (p.regime, p.positions) == ("power", "equal")
    for bad in (dict(regime="x"), dict(objective="x"), dict(positions="x")):
        with pytest.raises(DomainError):
            OptimizationProblem(0.05, 100, 1, 1.0, **bad)
    with pytest.raises(DomainError):
        OptimizationProblem(0.05, 100, -1, 1.0)


def test_link_capacity_matches_propagation():
    plan = LinkPlan(0.05, 100, (30, 70), (3.0, 5.0))
    out = propagate_link(plan, SignalState.coherent_q(7))
    assert link_capacity(plan, 7) == pytest.approx(capacity_homodyne(out.s_q / out.n_q), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 4))
def test_golden_section_on_parabola(c, w):
    x, fx, _ = golden_section_max(lambda t: -(t - c) ** 2, c - w, c + 2 * w)
    assert x == pytest.approx(c, abs=1e-6)
    # a monotone function is maximised at the endpoint
    x, _, _ = golden_section_max(lambda t: t, 0.0, w)
    assert x == w


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.floats(0.01, 0.1), st.floats(20, 400), st.floats(0.5, 300))
def test_power_result_always_feasible(r, alpha, length, nbar):
    res = optimize(OptimizationProblem(alpha, length, r, nbar, regime="power"))
    assert res.feasibility_margin >= -1e-9 * (2 * nbar + 1)
    assert res.plan.amp_count == r
