import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdemg.symbols import (
    CoeffSet, F_upper_bound, bttb_symbol_eigs, check_F_zero_order, check_limsup_ratio_h_over_F,
    check_projector_condition, distribution_distances, ecdf_distance, eval_F, eval_f_gamma, eval_f_series,
    eval_h, eval_phi, eval_q_gamma, h_over_F_target, mirror_points, polar_angle, projector_p,
    q_zero_order_bracket, symbol_grid_samples,
)

orders = st.floats(min_value=1.01, max_value=2.0)
angles = st.floats(min_value=-np.pi, max_value=np.pi)


@pytest.mark.parametrize("gamma", [1.1, 1.5, 2.0])
def test_f_vanishes_at_zero(gamma):
    assert eval_f_gamma(gamma, 0.0) == 0


@pytest.mark.parametrize("gamma", [1.1, 1.5, 1.9, 2.0])
def test_f_at_pi(gamma):
    v = eval_f_gamma(gamma, np.pi)
    assert v.real == pytest.approx((gamma - 1) * 2**gamma, rel=1e-13)
    assert abs(v.imag) < 1e-12


def test_f_laplacian_closed_form():
    xi = np.linspace(-np.pi, np.pi, 33)
    np.testing.assert_allclose(eval_f_gamma(2.0, xi), 2 - np.exp(1j * xi) - np.exp(-1j * xi), atol=1e-13)


def test_f_matches_series_at_pi_over_3():
    v = eval_f_gamma(1.5, np.pi / 3)
    assert abs(v - eval_f_series(1.5, np.pi / 3, 100_000)) <= 1e-8


def test_q_is_twice_real_part():
    xi = np.linspace(-3, 3, 50)
    np.testing.assert_allclose(eval_q_gamma(1.7, xi), 2 * eval_f_gamma(1.7, xi).real)


@given(orders, angles)
@settings(max_examples=100, deadline=None)
def test_q_even_and_nonnegative(gamma, xi):
    q = eval_q_gamma(gamma, xi)
    assert q == eval_q_gamma(gamma, -xi)
    assert q >= 0


@pytest.mark.parametrize("gamma", [1.1, 1.5, 1.9])
def test_q_zero_of_order_gamma(gamma):
    c1, c2 = q_zero_order_bracket(gamma)
    assert 0 < c1 <= c2 < 2 * c1


def test_F_values():
    assert eval_F(1.8, 1.6, 1.0, 1.0, 1.0, 0.0, 0.0) == 0
    want = 0.8 * 2**2.8 + 0.6 * 2**2.6
    assert eval_F(1.8, 1.6, 1.0, 1.0, 1.0, np.pi, np.pi) == pytest.approx(want, rel=1e-13)
    assert F_upper_bound(1.8, 1.6, 1.0, 1.0, 1.0) == pytest.approx(want)


def test_F_sup_bound_on_grid():
    t = np.linspace(-np.pi, np.pi, 512)
    T1, T2 = np.meshgrid(t, t)
    F = eval_F(1.4, 1.9, 2.0, 0.5, 3.0, T1, T2)
    assert F.min() >= 0
    assert F.max() <= F_upper_bound(1.4, 1.9, 2.0, 0.5, 3.0) * (1 + 1e-12)


@given(orders, orders, angles, angles)
@settings(max_examples=60, deadline=None)
def test_F_positive_away_from_origin(a, b, t1, t2):
    F = eval_F(a, b, 1.0, 1.0, 1.0, t1, t2)
    assert F >= 0
    if abs(t1) > 1e-3 or abs(t2) > 1e-3:
        assert F > 0


def test_phi_is_F_plus_identity_term():
    t1, t2 = np.meshgrid(np.linspace(-3, 3, 9), np.linspace(-3, 3, 9))
    phi = eval_phi(1.8, 1.6, 0.7, 1.3, 1.0, 1.0, 1.0, 1.0, t1, t2)
    np.testing.assert_allclose(np.real(phi), 0.7 + eval_F(1.8, 1.6, 1.0, 1.0, 1.3, t1, t2), atol=1e-13)


def test_h_reduces_to_F_for_constant_coefficients():
    t1, t2 = np.meshgrid(np.linspace(-3, 3, 7), np.linspace(-3, 3, 7))
    h = eval_h(1.8, 1.6, CoeffSet.constant(2.0, 0.5), 1.3, (0.2, 0.4), t1, t2)
    np.testing.assert_allclose(h, eval_F(1.8, 1.6, 2.0, 0.5, 1.3, t1, t2), atol=1e-13)
    assert eval_h(1.8, 1.6, CoeffSet.constant(2.0, 0.5), 1.3, (0.2, 0.4), 0.0, 0.0) == 0


def test_h_matches_series_for_example1_coefficients():
    from fdemg.verification import _EX1_COEFFS as C

    x, y = 1.0, 1.0
    th = np.pi / 2
    K = 100_000
    ga = C.d_plus(x, y) * eval_f_series(1.8, th, K) + C.d_minus(x, y) * eval_f_series(1.8, -th, K)
    gb = C.e_plus(x, y) * eval_f_series(1.6, th, K) + C.e_minus(x, y) * eval_f_series(1.6, -th, K)
    assert abs(eval_h(1.8, 1.6, C, 1.0, (x, y), th, th) - (ga + gb)) < 1e-6


def test_projector_range_and_zeros():
    t = np.linspace(-np.pi, np.pi, 41)
    T1, T2 = np.meshgrid(t, t)
    p = projector_p(T1, T2)
    assert p.min() >= 0 and p.max() == pytest.approx(4.0)
    assert projector_p(np.pi, 0.3) == pytest.approx(0.0, abs=1e-15)


def test_mirror_points():
    pts = mirror_points((0.0, 0.0))
    np.testing.assert_allclose(pts, [(0, np.pi), (np.pi, 0), (np.pi, np.pi)])
    pts = mirror_points((np.pi / 2, 0.0))
    np.testing.assert_allclose(pts, [(np.pi / 2, np.pi), (np.pi / 2, 0), (np.pi / 2, np.pi)])


def test_polar_angle_at_zero():
    assert polar_angle(0.0) == -np.pi / 2


@pytest.mark.parametrize("mode", ["tgm", "vcycle"])
@pytest.mark.parametrize("a,b", [(1.8, 1.6), (1.5, 1.5), (1.2, 1.95)])
def test_projector_condition_holds(a, b, mode):
    rep = check_projector_condition(a, b, 1.0, 1.0, 1.0, mode=mode)
    assert rep.verdict
    assert np.all(np.diff(rep.radii) < 0)
    assert len(rep.ray_angles) >= 16


def test_projector_condition_rejects_mode():
    with pytest.raises(ValueError):
        check_projector_condition(1.8, 1.6, 1, 1, 1, mode="w")


def test_F_zero_order_bound():
    rep = check_F_zero_order(1.8, 1.6, 1.0, 1.0, 1.0)
    assert rep.verdict
    assert rep.target.real == pytest.approx(-2 * np.cos(1.6 * np.pi / 2))


def test_h_over_F_symmetric_coefficients_real_limit():
    C = CoeffSet(lambda x, y: 2.0, lambda x, y: 2.0, lambda x, y: 1.0 + x, lambda x, y: 1.0 + x)
    target = h_over_F_target(1.8, 1.6, C, 1.0, 1.0, (0.5, 0.5))
    assert target.imag == 0 and target.real == pytest.approx(1.5)


def test_h_over_F_example1_lower_order_branch():
    from fdemg.verification import _EX1_COEFFS as C

    rep = check_limsup_ratio_h_over_F(1.8, 1.6, C, 1.0, 1.0, 1.0, (0.5, 0.5))
    ep, em = C.e_plus(0.5, 0.5), C.e_minus(0.5, 0.5)
    want = (ep + em) / 2 - 1j * np.tan(1.6 * np.pi / 2) * (ep - em) / 2
    assert rep.target == pytest.approx(want)
    assert rep.verdict


def test_h_over_F_constant_is_one():
    rep = check_limsup_ratio_h_over_F(1.6, 1.8, CoeffSet.constant(1.0, 1.0), 1.0, 1.0, 1.0, (0.3, 0.3))
    assert rep.target == 1 and rep.verdict


def test_h_over_F_needs_distinct_orders():
    with pytest.raises(ValueError):
        check_limsup_ratio_h_over_F(1.5, 1.5, CoeffSet.constant(1, 1), 1, 1, 1, (0.5, 0.5))


def test_ecdf_distance_basics():
    assert ecdf_distance([1, 2, 3], [1, 2, 3]) == 0
    assert ecdf_distance([0, 0], [1, 1]) == 1


def test_bttb_eigs_real_positive_and_bounded():
    ev = bttb_symbol_eigs(1.8, 1.6, 1.0, 1.0, 1.0, 16)
    assert ev.min() > 0
    assert ev.max() < F_upper_bound(1.8, 1.6, 1.0, 1.0, 1.0)
    assert symbol_grid_samples(1.8, 1.6, 1.0, 1.0, 1.0, 16).shape == (256,)


def test_distribution_distance_decreases():
    d = distribution_distances(1.8, 1.6)
    assert d[0] > d[1] > d[2]
