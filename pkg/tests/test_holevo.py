import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import g_ref, gh_bruteforce, random_physical_channel
from psalink.errors import DegenerateChannelError, DomainError
from psalink.holevo import (ABOVE, BELOW, COHERENT, ChannelMatrices, FiducialParams, capacity_above_threshold,
                            capacity_below_threshold, capacity_coherent, compute_fiducial, g_function,
                            g_prime, gh_capacity, inline_fiducial, threshold_energy,
                            transcendental_residual)
from psalink.link import LinkPlan, SignalState, propagate_link
from psalink.shannon import capacity_homodyne

# thermal entropies evaluated with mpmath at 30 digits
G_100 = 8.0937407804587989
G_50 = 7.1008829518100403


def pure_loss(tau):
    return ChannelMatrices.from_power_gains(tau, tau, (1 - tau) / 2, (1 - tau) / 2)


def test_g_values():
    assert g_function(0) == 0
    assert g_function(1) == pytest.approx(2.0, rel=1e-15)
    assert g_function(100) == pytest.approx(G_100, rel=1e-14)
    assert g_function(50) == pytest.approx(G_50, rel=1e-14)
    assert g_function(1e-15) == pytest.approx(float(g_ref(1e-15)), rel=1e-9)
    with pytest.raises(DomainError):
        g_function(-1e-3)


def test_g_prime_values():
    assert g_prime(1) == pytest.approx(1.0, rel=1e-15)
    assert g_prime(3) == pytest.approx(math.log2(4 / 3), rel=1e-14)
    assert g_prime(1e12) < 1e-11
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            g_prime(bad)


def g_mp(x):
    with mpmath.workdps(40):
        x = mpmath.mpf(x)
        return float(((x + 1) * mpmath.log(x + 1) - x * mpmath.log(x)) / mpmath.log(2))


@given(st.floats(1e-9, 1e9))
def test_g_identities(x):
    assert g_function(x) >= math.log2(1 + x) * (1 - 1e-12)
    assert g_function(x) == pytest.approx(g_mp(x), rel=1e-13)
    h = 1e-6 * x
    num = (g_function(x + h) - g_function(x - h)) / (2 * h)
    assert g_prime(x) == pytest.approx(num, rel=1e-5, abs=1e-9)


def test_g_excess_over_log_tends_to_log2e():
    # g(x) - log2(1+x) = x log2(1 + 1/x), which approaches log2(e) like 1/(2x ln 2)
    for x in (1e2, 1e4, 1e6):
        gap = g_function(x) - math.log2(1 + x)
        assert gap < math.log2(math.e)
        assert (math.log2(math.e) - gap) * x == pytest.approx(0.5 / math.log(2), rel=2e-2)


def test_fiducial_examples():
    f = compute_fiducial(pure_loss(0.5))
    assert (f.tau, f.y, f.omega) == pytest.approx((0.5, 0.25, 1.0), rel=1e-15)
    f = compute_fiducial(ChannelMatrices((1.0, 1.0), (1.0, 1.0)))
    assert (f.tau, f.y, f.omega) == (1.0, 1.0, 1.0)
    length = math.log(2) / 0.05
    ch = ChannelMatrices.from_link(LinkPlan(0.05, length, (length,), (2.0,)))
    assert ch.x_diag == pytest.approx((1.0, 0.5), rel=1e-14)
    assert ch.y_diag == pytest.approx((0.5, 0.125), rel=1e-14)
    f = compute_fiducial(ch)
    assert (f.tau, f.y, f.omega) == pytest.approx((0.5, 0.25, 1.0), rel=1e-14)


def test_fiducial_degenerate_cases():
    with pytest.raises(DegenerateChannelError):
        compute_fiducial(ChannelMatrices((1.0, 1.0), (0.0, 0.5)))
    f = compute_fiducial(ChannelMatrices((2.0, 0.5), (0.0, 0.0)))
    assert (f.tau, f.y) == (1.0, 0.0)


@settings(max_examples=200)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-5, 3), st.floats(-5, 3))
def test_noise_rebuilt_from_fiducial(lx1, lx2, ly1, ly2):
    x1, x2, y1, y2 = (math.exp(v) for v in (lx1, lx2, ly1, ly2))
    f = compute_fiducial(ChannelMatrices((x1, x2), (y1, y2)))
    assert f.noise_diag(x1 / x2) == pytest.approx((y1, y2), rel=1e-10)


def test_threshold_examples():
    assert threshold_energy(FiducialParams(0.5, 0.25, 1.0)) == 0
    assert threshold_energy(FiducialParams(1.0, 1.0, 1.0)) == 0
    # quadrature swap symmetry: the quieter quadrature carries the modulation
    assert threshold_energy(FiducialParams(0.5, 0.5, 2.0)) == pytest.approx(1.25, rel=1e-15)
    assert threshold_energy(FiducialParams(0.5, 0.5, 0.5)) == pytest.approx(1.25, rel=1e-15)


def test_threshold_matches_oracle_structure():
    # fiducial (0.5, 0.5, 2.0) realised with x1 = x2; below the threshold the
    # brute-force optimum leaves one quadrature unmodulated, above it uses both
    ch = ((math.sqrt(0.5), math.sqrt(0.5)), (0.25, 1.0))
    _, (vq, sq, si) = gh_bruteforce(ch, 1.0)
    assert min(sq, si) < 1e-6
    _, (vq, sq, si) = gh_bruteforce(ch, 2.0)
    assert min(sq, si) > 0.5
    assert gh_capacity(ChannelMatrices(*ch), 1.0).regime == BELOW
    assert gh_capacity(ChannelMatrices(*ch), 2.0).regime == ABOVE


@pytest.mark.parametrize("tau", [0.01, 0.1, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("nbar", [0.1, 1.0, 10.0, 100.0])
def test_pure_loss_collapse(tau, nbar):
    for mode in ("optimal", "coherent"):
        assert gh_capacity(pure_loss(tau), nbar, mode).capacity == pytest.approx(g_function(tau * nbar), abs=1e-10)


def test_above_threshold_example():
    r = capacity_above_threshold(FiducialParams(0.5, 0.25, 1.0), 100)
    assert r.capacity == pytest.approx(G_50, rel=1e-13)
    assert r.regime == ABOVE
    assert r.mbar_out >= r.m_out >= 0


def test_above_threshold_rejects_low_energy():
    with pytest.raises(Exception):
        capacity_above_threshold(FiducialParams(0.5, 0.5, 2.0), 0.2)


def test_below_threshold_rejects_high_energy():
    with pytest.raises(Exception):
        capacity_below_threshold(FiducialParams(0.5, 0.5, 2.0), 3.0)


def test_noiseless_channels():
    assert gh_capacity(ChannelMatrices((1.0, 1.0), (0.0, 0.0)), 1).capacity == pytest.approx(2.0, rel=1e-15)
    assert capacity_coherent(FiducialParams(1.0, 0.0, 1.0), 7.0) == pytest.approx(g_function(7.0))
    # squeezing without loss is unitary, capacity unchanged
    assert gh_capacity(ChannelMatrices((3.0, 1 / 3.0), (0.0, 0.0)), 5).capacity == pytest.approx(g_function(5))


def test_identity_and_long_pure_loss():
    assert gh_capacity(ChannelMatrices((1.0, 1.0), (0.0, 0.0)), 1.0).capacity == pytest.approx(2.0)
    tau = math.exp(-5)
    r = gh_capacity(ChannelMatrices.from_link(LinkPlan(0.05, 100)), 100)
    assert r.capacity == pytest.approx(g_function(100 * tau), rel=1e-12)
    assert r.capacity == pytest.approx(1.6276409160147898, rel=1e-12)


def test_below_threshold_beats_coherent():
    f = FiducialParams(0.5, 0.5, 2.0)
    below = capacity_below_threshold(f, 0.25)
    assert below.capacity > capacity_coherent(f, 0.25)
    # brute-force maximum of the Holevo quantity over squeezed Gaussian ensembles
    assert below.capacity == pytest.approx(0.35090418935401135, rel=1e-9)
    assert abs(transcendental_residual(f, 0.25, below.omega_in)) < 1e-10


@settings(max_examples=150, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 3.0), st.floats(-3, 3), st.floats(0.0, 1.0))
def test_residual_at_root(tau, excess, log_omega, frac):
    y = abs(1 - tau) / 2 + excess
    if y == 0:
        return
    f = FiducialParams(tau, y, math.exp(log_omega))
    thr = threshold_energy(f)
    nbar = frac * thr
    if nbar <= 1e-9 or thr - nbar < 1e-9:
        return
    r = capacity_below_threshold(f, nbar)
    res = transcendental_residual(f, nbar, r.omega_in)
    if abs(res) >= 1e-10:
        # the root is pinned to floating-point resolution: the residual flips sign within a few ulps
        step = 4 * math.ulp(r.omega_in)
        lo = transcendental_residual(f, nbar, r.omega_in - step)
        hi = transcendental_residual(f, nbar, r.omega_in + step)
        assert lo * hi <= 0
    assert r.capacity >= capacity_coherent(f, nbar) - 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.01, 3.0), st.floats(-3, 3))
def test_threshold_continuity(tau, excess, log_omega):
    f = FiducialParams(tau, abs(1 - tau) / 2 + excess, math.exp(log_omega))
    thr = threshold_energy(f)
    if thr < 1e-3:
        return
    below = capacity_below_threshold(f, thr - 1e-4).capacity
    above = capacity_above_threshold(f, thr).capacity
    assert abs(below - above) < 1e-3  # slope times the bracket width
    below = capacity_below_threshold(f, thr * (1 - 1e-9)).capacity
    assert abs(below - above) < 1e-6


def test_matches_bruteforce_on_random_channels():
    rng = np.random.default_rng(7)
    for _ in range(25):
        ch = random_physical_channel(rng)
        nbar = float(np.exp(rng.uniform(-3, 5)))
        for mode in ("optimal", "coherent"):
            want, _ = gh_bruteforce(ch, nbar, coherent=mode == "coherent")
            got = gh_capacity(ChannelMatrices(*ch), nbar, mode).capacity
            assert got == pytest.approx(want, rel=1e-8, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 15), st.floats(0.01, 0.1), st.floats(1, 400), st.floats(0.5, 3.0), st.floats(0.01, 300))
def test_hierarchy_on_links(r, alpha, length, gain_scale, nbar):
    plan = LinkPlan.equally_spaced(alpha, length, r, math.exp(alpha * length / (r + 1)) * gain_scale)
    ch = ChannelMatrices.from_link(plan)
    opt = gh_capacity(ch, nbar, "optimal")
    coh = gh_capacity(ch, nbar, "coherent")
    out = propagate_link(plan, SignalState.coherent_q(nbar))
    hom = capacity_homodyne(out.s_q / out.n_q)
    assert opt.capacity >= coh.capacity - 1e-9
    assert coh.capacity >= hom - 1e-9
    assert opt.regime in (ABOVE, BELOW) and coh.regime == COHERENT


def test_large_noise_homodyne_limit():
    # noise grows, SNR fixed: GH approaches the homodyne value
    snr_q = 100.0
    gaps = []
    for r in (20, 80, 250):
        plan = LinkPlan.equally_spaced(0.05, 10.0 * (r + 1), r, math.exp(0.5))
        out = propagate_link(plan, SignalState.coherent_q(1.0))
        nbar = snr_q * out.n_q / out.s_q  # out.s_q already carries 2*nbar = 2
        ch = ChannelMatrices.from_link(plan)
        gh = gh_capacity(ch, nbar, "coherent").capacity
        gaps.append(abs(gh - capacity_homodyne(snr_q)) / gh)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 0.01


def test_physicality_check():
    with pytest.raises(DomainError):
        gh_capacity(ChannelMatrices((0.5, 0.5), (0.01, 0.01)), 1.0)


def test_inline_shortcut_disagrees_with_matrices():
    plan = LinkPlan.equally_spaced(0.05, 100, 10, math.exp(0.05 * 100 / 11))
    inline = inline_fiducial(plan)
    matrix = compute_fiducial(ChannelMatrices.from_link(plan))
    assert matrix.tau == pytest.approx(plan.tau_total, rel=1e-12)
    assert inline.tau == pytest.approx(plan.tau_total * plan.gain_total, rel=1e-12)
    assert inline.y == pytest.approx(matrix.y, rel=1e-12)
    assert abs(inline.tau - matrix.tau) > 0.5
