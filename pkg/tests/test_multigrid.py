import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fdemg.multigrid import (
    GridTransfer, build_galerkin_hierarchy, build_geometric_hierarchy, galerkin_coarse, jacobi_sweep, prolong,
    prolongation_1d, restrict, smoothing_bound_omega, tgm_iteration_matrix, two_grid, verify_tgm_theory, vcycle,
)
from fdemg.problems import Grid, assemble_step_operator, constant_problem, get_example
from fdemg.structured_ops import StructuredFdeOperator, ToeplitzBlock, dense_assemble


def laplacian(n, inv_r=0.0):
    return StructuredFdeOperator.from_constants(2.0, 2.0, n, n, inv_r, 1.0, 0.5, 0.5, 0.5, 0.5)


def sym_const(alpha, beta, n, inv_r=0.0):
    A = dense_assemble(StructuredFdeOperator.from_constants(alpha, beta, n, n, inv_r, 1.0, 1, 1, 1, 1))
    return (A + A.T) / 2


def test_prolongation_1d_odd():
    P = prolongation_1d(7).toarray()
    want = np.zeros((7, 3))
    for j, i in enumerate((1, 3, 5)):
        want[i - 1:i + 2, j] = [0.5, 1.0, 0.5]
    np.testing.assert_array_equal(P, want)


def test_prolongation_1d_even_picks_odd_nodes():
    P = prolongation_1d(8).toarray()
    assert P.shape == (8, 4)
    np.testing.assert_array_equal(P[:, 0], [1.0, 0.5, 0, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(P[:, 3], [0, 0, 0, 0, 0, 0.5, 1.0, 0.5])


def test_transfer_zero_and_constants():
    t = GridTransfer.build(7, 7)
    assert not restrict(t, np.zeros(49)).any()
    assert not prolong(t, np.zeros(9)).any()
    c = restrict(t, np.ones(49)).reshape(3, 3)
    assert c[1, 1] == pytest.approx(1.0)


def test_prolong_footprint():
    t = GridTransfer.build(7, 7)
    e = np.zeros(9)
    e[4] = 1.0  # coarse (2, 2) sits on fine (4, 4), 1-based
    f = prolong(t, e).reshape(7, 7)
    stencil = np.outer([0.5, 1, 0.5], [0.5, 1, 0.5])
    np.testing.assert_array_equal(f[2:5, 2:5], stencil)
    assert f.sum() == pytest.approx(4.0)


def test_prolong_reproduces_linears():
    n = 15
    t = GridTransfer.build(n, n)
    xf = np.arange(1, n + 1)
    xc = xf[1::2]
    lin = lambda x, y: 2 * x - 3 * y + 1
    fine = prolong(t, lin(*np.meshgrid(xc, xc)).ravel()).reshape(n, n)
    want = lin(*np.meshgrid(xf, xf))
    np.testing.assert_allclose(fine[1:-1, 1:-1], want[1:-1, 1:-1])


def test_transfer_dimension_checks():
    t = GridTransfer.build(5, 6)
    with pytest.raises(ValueError):
        restrict(t, np.zeros(29))
    with pytest.raises(ValueError):
        prolong(t, np.zeros(7))
    with pytest.raises(ValueError):
        prolongation_1d(1)


@given(st.integers(2, 20), st.integers(2, 20), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_restrict_prolong_adjoint(n1, n2, seed):
    rng = np.random.default_rng(seed)
    t = GridTransfer.build(n1, n2)
    f = rng.standard_normal(n1 * n2)
    c = rng.standard_normal(t.k1 * t.k2)
    lhs = 4 * restrict(t, f) @ c
    rhs = f @ prolong(t, c)
    assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(rhs))


@pytest.mark.parametrize("n", [7, 8, 15, 16, 31])
def test_galerkin_matches_dense_ptap(n):
    rng = np.random.default_rng(n)
    D = [rng.uniform(0.5, 2, n * n) for _ in range(4)]
    op = StructuredFdeOperator(n, n, 0.3, 1.2, ToeplitzBlock.from_order(1.8, n), ToeplitzBlock.from_order(1.6, n), *D)
    t = GridTransfer.build(n, n)
    A = dense_assemble(op)
    P = t.P.toarray()
    ref = P.T @ A @ P
    for got in (galerkin_coarse(op.to_sparse(), t).toarray(), galerkin_coarse(A, t)):
        assert np.abs(got - ref).max() <= 1e-12 * np.abs(ref).max()


def test_galerkin_1d_laplacian_stencil():
    L = ToeplitzBlock.from_order(2.0, 7).dense()
    P = prolongation_1d(7).toarray()
    np.testing.assert_allclose(P.T @ L @ P, 0.5 * ToeplitzBlock.from_order(2.0, 3).dense(), atol=1e-15)


def test_galerkin_hierarchy_symmetry_and_identity():
    h = build_galerkin_hierarchy(laplacian(31).to_sparse(), 31, 31)
    for lv in h.levels:
        A = lv.operator.toarray() if sp.issparse(lv.operator) else lv.operator
        np.testing.assert_allclose(A, A.T, atol=1e-13)
    t = GridTransfer.build(7, 7)
    C = galerkin_coarse(np.eye(49), t)
    assert np.linalg.eigvalsh(C).min() > 0


def test_galerkin_dense_guard():
    with pytest.raises(ValueError):
        build_galerkin_hierarchy(np.eye(100), 10, 10, dense_cap=50)


def test_geometric_hierarchy_orders():
    p = get_example(1)
    h = build_geometric_hierarchy(p, Grid.for_problem(p, 63), 1)
    assert h.orders == [(63, 63), (31, 31), (15, 15), (7, 7)]
    assert all(np.all(lv.diag > 0) for lv in h.levels)
    assert all(isinstance(lv.operator, StructuredFdeOperator) for lv in h.levels)


def test_geometric_coarse_operator_is_rediscretization():
    p = constant_problem(1.7, 1.5, d=1.3, e=0.6)
    g = Grid.for_problem(p, 15, 15, 15)
    h = build_geometric_hierarchy(p, g, 1)
    c = h.levels[1].operator
    want = StructuredFdeOperator.from_constants(1.7, 1.5, 7, 7, 2 * (2 * g.hx) ** 1.7 / g.dt,
                                                (2 * g.hx) ** 1.7 / (2 * g.hy) ** 1.5, 1.3, 1.3, 0.6, 0.6)
    np.testing.assert_allclose(dense_assemble(c), dense_assemble(want), rtol=1e-13)
    assert h.levels[0].rhs_scale == pytest.approx(2**1.7)


def test_jacobi_basics():
    A = np.array([[4.0, -1.0], [-1.0, 3.0]])
    x = np.array([1.0, 2.0])
    b = A @ x
    np.testing.assert_array_equal(jacobi_sweep(np.diag(A), lambda v: A @ v, x, b, 0.7), x)
    assert jacobi_sweep(np.array([5.0]), lambda v: 5 * v, np.zeros(1), np.array([3.0]), 1.0)[0] == pytest.approx(0.6)
    with pytest.raises(ValueError):
        jacobi_sweep(np.array([0.0, 1.0]), lambda v: v, x, b, 0.5)
    with pytest.raises(ValueError):
        jacobi_sweep(np.diag(A), lambda v: A @ v, x, b, 0.0)


def test_smoothing_bound():
    assert smoothing_bound_omega(2, 2, 1, 1, 1, 0.0) == pytest.approx(0.9)
    lo = smoothing_bound_omega(1.8, 1.6, 1, 1, 1, 0.1)
    hi = smoothing_bound_omega(1.8, 1.6, 1, 1, 1, 0.5)
    assert 0 < lo < hi


@pytest.mark.parametrize("a,b", [(2.0, 2.0), (1.8, 1.6), (1.3, 1.9)])
def test_jacobi_never_increases_energy_error(a, b):
    n = 15
    A = sym_const(a, b, n)
    omega = smoothing_bound_omega(a, b, 1, 1, 1, 0.0)
    rng = np.random.default_rng(0)
    for _ in range(100):
        e = rng.standard_normal(n * n)
        e1 = jacobi_sweep(np.diag(A), lambda v: A @ v, e, np.zeros_like(e), omega)
        assert e1 @ A @ e1 <= e @ A @ e * (1 + 1e-12)


def test_tgm_never_increases_energy_error():
    A = sym_const(1.8, 1.6, 15, inv_r=0.2)
    TG = tgm_iteration_matrix(A, GridTransfer.build(15, 15).P.toarray(), 0.9)
    rng = np.random.default_rng(1)
    for _ in range(100):
        e = rng.standard_normal(225)
        assert (TG @ e) @ A @ (TG @ e) <= e @ A @ e


def test_two_grid_fixed_point_and_reduction():
    p = get_example(1)
    g = Grid.for_problem(p, 15)
    A = dense_assemble(assemble_step_operator(p, g, 1))
    t = GridTransfer.build(15, 15)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(225)
    np.testing.assert_allclose(two_grid(A, t, A @ x, x), x, atol=1e-12)
    b = rng.standard_normal(225)
    y = two_grid(A, t, b, np.zeros(225))
    assert np.linalg.norm(b - A @ y) <= 0.5 * np.linalg.norm(b)
    with pytest.raises(ValueError):
        two_grid(A, t, b, y, coarse_mode="geometric")


def test_tgm_contraction_stable_in_n():
    norms = []
    for n in (15, 31):
        A = sym_const(1.8, 1.6, n)
        TG = tgm_iteration_matrix(A, GridTransfer.build(n, n).P.toarray(), 0.9)
        L = np.linalg.cholesky(A)
        norms.append(np.linalg.norm(L.T @ TG @ np.linalg.inv(L.T), 2))
    assert max(norms) < 1 and abs(norms[0] - norms[1]) < 0.1


@pytest.mark.parametrize("a,b", [(2.0, 2.0), (1.7, 1.5)])
def test_verify_tgm_theory(a, b):
    A = sym_const(a, b, 15)
    rep = verify_tgm_theory(A, GridTransfer.build(15, 15), smoothing_bound_omega(a, b, 1, 1, 1, 0.0))
    assert rep.delta_est > 0 and rep.xi_ge_delta and rep.within_bound
    assert np.all((rep.contraction_estimates > 0) & (rep.contraction_estimates < 1))


def test_verify_tgm_theory_smoke_diagonal():
    rng = np.random.default_rng(3)
    A = np.diag(rng.uniform(1, 2, 25))
    rep = verify_tgm_theory(A, GridTransfer.build(5, 5), 0.5, runs=3)
    assert rep.xi_ge_delta and rep.within_bound


def test_vcycle_fixed_point():
    p = get_example(2)
    g = Grid.for_problem(p, 31)
    op = assemble_step_operator(p, g, 1)
    h = build_geometric_hierarchy(p, g, 1)
    x = np.random.default_rng(4).standard_normal(g.N)
    np.testing.assert_allclose(vcycle(h, op.apply_M(x), x0=x), x, atol=1e-10)


def test_laplacian_vcycle_baseline():
    op = laplacian(63)
    h = build_galerkin_hierarchy(op.to_sparse(), 63, 63)
    b = np.random.default_rng(5).standard_normal(63 * 63)
    x = vcycle(h, b)
    assert np.linalg.norm(b - op.apply_M(x)) <= 0.25 * np.linalg.norm(b)
    rates = []
    for _ in range(8):
        r0 = np.linalg.norm(b - op.apply_M(x))
        x = vcycle(h, b, x0=x)
        rates.append(np.linalg.norm(b - op.apply_M(x)) / r0)
    assert max(rates) <= 0.65


def _vcycle_rate(k, n):
    p = get_example(k)
    g = Grid.for_problem(p, n)
    op = assemble_step_operator(p, g, 1)
    h = build_geometric_hierarchy(p, g, 1)
    x = np.random.default_rng(6).standard_normal(g.N)
    rates = []
    for _ in range(12):
        r0 = np.linalg.norm(op.apply_M(x))
        x = vcycle(h, np.zeros(g.N), x0=x)
        rates.append(np.linalg.norm(op.apply_M(x)) / r0)
    return float(np.exp(np.mean(np.log(rates[-5:]))))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_vcycle_contraction_n_independent(k):
    r31, r63 = _vcycle_rate(k, 31), _vcycle_rate(k, 63)
    assert max(r31, r63) < 0.7
    assert abs(r31 - r63) < 0.1
