import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superscatter.errors import GridTooCoarse, TooFewFringes
from superscatter.kinematics1d import (
    Distribution1D,
    Kinematics1D,
    Pfin_of,
    default_grid_1d,
    fold_1d,
    fringe_spacing_1d,
    peak_positions,
    pfin_of,
    prob_pfin_1d,
    visibility_1d_analytic,
    visibility_1d_numeric,
)
from superscatter.oracles import elastic_1d_bruteforce
from superscatter.params import MassPair, ProbeBeam
from superscatter.target import TargetSuperposition, momentum_density

from conftest import P_IN

masses = st.floats(0.01, 100.0)


@given(m=masses, M=masses)
def test_exchange_coefficients(m, M):
    k = Kinematics1D(MassPair(m, M))
    assert 0 < k.a < 2 and abs(k.b) < 1
    assert k.a - k.b == pytest.approx((3 * m - M) / (M + m))
    assert k.jacobian == pytest.approx((M + m) / (2 * m))


def test_equal_masses_exchange():
    k = Kinematics1D(MassPair(2.0, 2.0))
    assert k.a == 1.0 and k.b == 0.0
    assert pfin_of(k, 3.0, -1.0) == -1.0
    assert Pfin_of(k, 3.0, -1.0) == 3.0


def test_heavy_target_mirror():
    k = Kinematics1D(MassPair(1.0, 1e9))
    assert pfin_of(k, 2.5, 0.0) == pytest.approx(-2.5, rel=1e-8)


def test_light_target_collision_against_bruteforce():
    # m = 1, M = 0.5, p = 1, target at rest: the probe keeps moving forward at 1/3.
    k = Kinematics1D(MassPair(1.0, 0.5))
    p_fin, P_fin = elastic_1d_bruteforce(1.0, 0.5, 1.0, 0.0)
    assert (p_fin, P_fin) == pytest.approx((1 / 3, 2 / 3))
    assert pfin_of(k, 1.0, 0.0) == pytest.approx(p_fin, abs=1e-15)
    assert Pfin_of(k, 1.0, 0.0) == pytest.approx(P_fin, abs=1e-15)


def test_reversed_probe_is_not_an_elastic_final_state():
    # p_fin = -1/3 with P_fin = 4/3 conserves momentum but not energy.
    assert -1 / 3 + 4 / 3 == pytest.approx(1.0)
    e_in = 1.0 / 2
    e_out = (1 / 3) ** 2 / 2 + (4 / 3) ** 2 / (2 * 0.5)
    assert abs(e_out - e_in) > 1.0


@given(m=masses, M=masses, p=st.floats(-50, 50), P=st.floats(-50, 50))
def test_conservation(m, M, p, P):
    k = Kinematics1D(MassPair(m, M))
    pf, Pf = pfin_of(k, p, P), Pfin_of(k, p, P)
    assert pf + Pf == pytest.approx(p + P, abs=1e-12 * (abs(p) + abs(P) + 1e-300))
    e_in = p * p / (2 * m) + P * P / (2 * M)
    e_out = pf * pf / (2 * m) + Pf * Pf / (2 * M)
    assert e_out == pytest.approx(e_in, rel=1e-12, abs=1e-300)


@given(m=masses, M=masses, p=st.floats(0.1, 50), P=st.floats(-50, 50))
def test_pstar_inverts_kinematics(m, M, p, P):
    k = Kinematics1D(MassPair(m, M))
    assert k.pstar(p, pfin_of(k, p, P)) == pytest.approx(P, abs=1e-9 * (abs(p) + abs(P)) * k.jacobian)


def test_prob_equal_mass_reproduces_target():
    t = TargetSuperposition(7.0, 0.2, 0.4)
    k = Kinematics1D(MassPair(1.0, 1.0))
    P = np.linspace(-10, 10, 101)
    np.testing.assert_allclose(prob_pfin_1d(k, t, P_IN, P, epsilon=2.0), 4.0 * momentum_density(t, P))
    assert prob_pfin_1d(k, t.with_alpha(math.pi), P_IN, 0.0) == 0.0


def test_prob_is_shifted_and_scaled_target():
    t = TargetSuperposition(7.0, 0.2)
    m, M = 1.0, 3.0
    k = Kinematics1D(MassPair(m, M))
    pf = np.linspace(-12, 0, 51)
    P = (M + m) / (2 * m) * pf + (M - m) / (2 * m) * P_IN
    np.testing.assert_allclose(prob_pfin_1d(k, t, P_IN, pf), (M + m) / (2 * m) * momentum_density(t, P))


@pytest.mark.parametrize("ratio", [0.5, 1.0, 2.0])
def test_fringe_spacing_by_peak_finding(ratio):
    t = TargetSuperposition(7.0, 0.1)
    k = Kinematics1D(MassPair(1.0, ratio))
    dist = fold_1d(k, t, ProbeBeam(P_IN), cosine_approx=True)
    spacing = np.diff(peak_positions(dist))
    np.testing.assert_allclose(spacing, fringe_spacing_1d(k, t), rtol=1e-6)
    assert fringe_spacing_1d(k, t) == pytest.approx(2 / (1 + ratio) * 2 * math.pi / 7)


def test_sharp_fold_equals_unfolded():
    t = TargetSuperposition(7.0, 0.2)
    k = Kinematics1D(MassPair(1.0, 0.5))
    dist = fold_1d(k, t, ProbeBeam(P_IN))
    raw = prob_pfin_1d(k, t, P_IN, dist.grid)
    np.testing.assert_allclose(dist.density * dist.normalization, raw, rtol=1e-12)
    assert dist.meta["rule"] == "none"


def test_default_grid():
    t = TargetSuperposition(7.0, 0.2)
    k = Kinematics1D(MassPair(1.0, 0.5))
    grid = default_grid_1d(k, t, ProbeBeam(P_IN))
    assert len(grid) >= 4096
    assert np.diff(grid).max() <= fringe_spacing_1d(k, t) / 20
    assert 0.5 * (grid[0] + grid[-1]) == pytest.approx(-k.b * P_IN)


def test_grid_too_coarse():
    t = TargetSuperposition(7.0, 0.2)
    k = Kinematics1D(MassPair(1.0, 0.5))
    with pytest.raises(GridTooCoarse):
        fold_1d(k, t, ProbeBeam(P_IN), grid=np.linspace(-5, 5, 50))


def test_distribution_invariants():
    with pytest.raises(ValueError):
        Distribution1D(np.array([0.0, 0.0, 1.0]), np.ones(3), 1.0)
    with pytest.raises(ValueError):
        Distribution1D(np.array([0.0, 1.0]), np.array([1.0, -1.0]), 1.0)


def test_equal_mass_fold_keeps_full_visibility():
    k = Kinematics1D(MassPair(1.0, 1.0))
    for frac in (0.05, 0.3):
        dist = fold_1d(k, TargetSuperposition(7.0, 0.2), ProbeBeam(P_IN, 0.0, frac * P_IN))
        assert visibility_1d_numeric(dist).visibility == pytest.approx(1.0, abs=1e-6)


def test_envelope_at_minus_one_eighth():
    # d (M - m) dp / m = 1 gives A = exp(-1/8).
    t = TargetSuperposition(7.0, 0.1)
    k = Kinematics1D(MassPair(1.0, 2.0))
    beam = ProbeBeam(P_IN, 0.0, 1.0 / 7.0)
    A = visibility_1d_analytic(k, t, beam).visibility
    assert A == pytest.approx(math.exp(-1 / 8), rel=1e-14)
    numeric = visibility_1d_numeric(fold_1d(k, t, beam, cosine_approx=True)).visibility
    assert numeric == pytest.approx(A, abs=1e-3)


def test_numeric_matches_analytic_over_sweep():
    t = TargetSuperposition(7.0, 0.1)
    k = Kinematics1D(MassPair(1.0, 2.0))
    for frac in np.linspace(0.0, 0.1, 10):
        beam = ProbeBeam(P_IN, 0.0, frac * P_IN)
        numeric = visibility_1d_numeric(fold_1d(k, t, beam, cosine_approx=True)).visibility
        assert numeric == pytest.approx(visibility_1d_analytic(k, t, beam).visibility, abs=2e-3)


def test_analytic_limits():
    t = TargetSuperposition(7.0, 0.2)
    assert visibility_1d_analytic(Kinematics1D(MassPair(1, 1)), t, ProbeBeam(P_IN, 0, 3.0)).visibility == 1.0
    assert visibility_1d_analytic(Kinematics1D(MassPair(1, 5)), t, ProbeBeam(P_IN)).visibility == 1.0
    heavy = visibility_1d_analytic(Kinematics1D(MassPair(1, 1e3)), t, ProbeBeam(P_IN, 0, 1 / 7.0))
    assert heavy.visibility < 1e-10 and heavy.method == "analytic"


@given(dp=st.floats(0.0, 3.0), ddp=st.floats(0.0, 1.0), d=st.floats(1.0, 10.0), dd=st.floats(0.0, 5.0),
       M=st.floats(0.1, 10.0), dM=st.floats(0.0, 5.0))
def test_analytic_monotonicity(dp, ddp, d, dd, M, dM):
    def A(M_, dp_, d_):
        return visibility_1d_analytic(Kinematics1D(MassPair(1.0, M_)), TargetSuperposition(d_, 0.1),
                                      ProbeBeam(10.0, 0.0, dp_)).visibility

    assert A(M, dp + ddp, d) <= A(M, dp, d)
    assert A(M, dp, d + dd) <= A(M, dp, d)
    above = max(M, 1.0)
    assert A(above + dM, dp, d) <= A(above, dp, d)
    below = min(M, 1.0)
    assert A(below / (1 + dM), dp, d) <= A(below, dp, d)


def test_heavy_target_fringes_vanish():
    t = TargetSuperposition(7.0, 0.2)
    beam = ProbeBeam(P_IN, 0.0, 1.0 / 7.0)
    vis = [visibility_1d_numeric(fold_1d(Kinematics1D(MassPair(1.0, r)), t, beam, cosine_approx=True)).visibility
           for r in (2.0, 5.0, 10.0, 100.0, 1000.0)]
    assert all(b <= a for a, b in zip(vis, vis[1:])) and vis[2] < vis[0]
    assert vis[-1] <= 1e-6


def test_full_density_heavy_target_has_no_fringes():
    t = TargetSuperposition(7.0, 0.2)
    dist = fold_1d(Kinematics1D(MassPair(1.0, 1e3)), t, ProbeBeam(P_IN, 0.0, 1.0 / 7.0))
    with pytest.raises(TooFewFringes):
        visibility_1d_numeric(dist)


def test_pure_cosine_has_unit_visibility():
    x = np.linspace(-10, 10, 20001)
    y = 1 + np.cos(3.0 * x)
    res = visibility_1d_numeric(Distribution1D(x, y, 1.0))
    assert res.visibility == pytest.approx(1.0, abs=1e-6) and res.method == "numeric"


def test_phase_shift_moves_pattern():
    # Shifting alpha by delta moves the p_fin comb by -delta * a / d.
    t = TargetSuperposition(7.0, 0.1)
    k = Kinematics1D(MassPair(1.0, 0.5))
    beam = ProbeBeam(P_IN, 0.0, 0.01 * P_IN)
    delta = 0.9
    d0 = fold_1d(k, t, beam, cosine_approx=True)
    d1 = fold_1d(k, t.with_alpha(delta), beam, grid=d0.grid, cosine_approx=True)
    h = d0.grid[1] - d0.grid[0]
    lags = np.arange(-200, 201)
    y0 = d0.density - d0.density.mean()
    y1 = d1.density - d1.density.mean()
    corr = np.array([np.dot(y1[200 + l: len(y1) - 200 + l], y0[200: len(y0) - 200]) for l in lags])
    i = int(np.argmax(corr))
    c0, c1, c2 = corr[i - 1], corr[i], corr[i + 1]
    shift = (lags[i] + 0.5 * (c0 - c2) / (c0 - 2 * c1 + c2)) * h
    period = fringe_spacing_1d(k, t)
    # A correlation peak at lag l means d1(x) = d0(x - l h): a displacement of +l h.
    mismatch = (shift + delta * k.a / t.d + 0.5 * period) % period - 0.5 * period
    assert abs(mismatch) < 1e-3 * delta * k.a / t.d
