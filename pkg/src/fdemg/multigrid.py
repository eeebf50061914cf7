"""Two-grid method, V-cycle and the geometric / Galerkin hierarchies.

Prolongation is ``P = T(p) U`` with ``p = (1 + cos t1)(1 + cos t2)``, i.e. the
bilinear interpolation stencil ``[1/2, 1, 1/2]`` per direction with zero
(Dirichlet) padding.  Restriction is full weighting, ``R = P^T / 4``.

Each level stores ``rhs_scale``, the factor applied to the restricted residual
before it is handed to the next coarser operator:

* Galerkin levels use ``A_c = P^T A P``, so the factor is 4 (``4 R = P^T``).
* Geometric levels rediscretize ``M`` on a grid with doubled widths.  Since
  ``M`` carries the factor ``h_x^alpha``, ``R M_h P ~ 2^-alpha M_H`` and the
  factor is ``2^alpha``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .fracweights import wsgd_weights
from .problems import FdeProblem, Grid, assemble_operator, coarse_size
from .structured_ops import StructuredFdeOperator, dense_assemble
from .symbols import eval_q_gamma

COARSEST = 8


def prolongation_1d(n: int) -> sp.csr_array:
    k = coarse_size(n)
    if k < 1:
        raise ValueError(f"cannot coarsen a line of {n} nodes")
    rows, cols, vals = [], [], []
    for j in range(k):
        i = 2 * (j + 1) - (n + 1) % 2 - 1  # 0-based fine index of coarse node j
        for off, v in ((-1, 0.5), (0, 1.0), (1, 0.5)):
            if 0 <= i + off < n:
                rows.append(i + off)
                cols.append(j)
                vals.append(v)
    return sp.csr_array((vals, (rows, cols)), shape=(n, k))


@dataclass(frozen=True)
class GridTransfer:
    n1: int
    n2: int
    P: sp.csr_array = field(repr=False, compare=False)

    @classmethod
    def build(cls, n1: int, n2: int) -> "GridTransfer":
        P = sp.csr_array(sp.kron(prolongation_1d(n2), prolongation_1d(n1)))
        return cls(n1, n2, P)

    @property
    def k1(self) -> int:
        return coarse_size(self.n1)

    @property
    def k2(self) -> int:
        return coarse_size(self.n2)

    def restrict(self, fine) -> np.ndarray:
        fine = np.asarray(fine, dtype=float)
        if fine.shape != (self.n1 * self.n2,):
            raise ValueError("dimension mismatch in restrict")
        return self.P.T @ fine / 4.0

    def prolong(self, coarse) -> np.ndarray:
        coarse = np.asarray(coarse, dtype=float)
        if coarse.shape != (self.k1 * self.k2,):
            raise ValueError("dimension mismatch in prolong")
        return self.P @ coarse


def restrict(t: GridTransfer, fine) -> np.ndarray:
    return t.restrict(fine)


def prolong(t: GridTransfer, coarse) -> np.ndarray:
    return t.prolong(coarse)


def jacobi_sweep(diag, apply: Callable, x, b, omega: float) -> np.ndarray:
    """One damped Jacobi step ``x + omega D^{-1} (b - A x)``."""
    diag = np.asarray(diag, dtype=float)
    if np.any(diag <= 0):
        raise ValueError("Jacobi needs a strictly positive diagonal")
    if omega <= 0:
        raise ValueError("omega must be positive")
    return x + omega * (b - apply(x)) / diag


def smoothing_bound_omega(alpha, beta, d, e, s_over_r, inv_r, grid_points: int = 1024) -> float:
    """``0.9 * 2 a0 / ||F||_inf`` for the constant-coefficient symbol.

    ``F`` is separable, so its sup over the ``grid_points^2`` grid is the sum
    of the two 1-D sups over the same points.
    """
    wa1 = wsgd_weights(alpha, 2).w[1]
    wb1 = wsgd_weights(beta, 2).w[1]
    a0 = inv_r - 2 * (d * wa1 + s_over_r * e * wb1)
    t = np.linspace(-np.pi, np.pi, grid_points)
    Fmax = d * eval_q_gamma(alpha, t).max() + e * s_over_r * eval_q_gamma(beta, t).max()
    return 0.9 * 2 * a0 / Fmax


def _as_apply(A) -> Callable:
    if isinstance(A, StructuredFdeOperator):
        return A.apply_M
    if callable(A) and not hasattr(A, "shape"):
        return A
    return lambda v: A @ v


def _diag_of(A) -> np.ndarray:
    if isinstance(A, StructuredFdeOperator):
        return A.diagonal()
    if sp.issparse(A):
        return A.diagonal()
    return np.diag(np.asarray(A))


def _dense_of(A) -> np.ndarray:
    if isinstance(A, StructuredFdeOperator):
        return dense_assemble(A)
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


@dataclass
class Level:
    n1: int
    n2: int
    operator: object
    diag: np.ndarray
    omega: float
    transfer: GridTransfer | None = None
    rhs_scale: float = 1.0

    def __post_init__(self):
        if np.any(self.diag <= 0):
            raise ValueError(f"non-positive diagonal on level {self.n1}x{self.n2}")
        self.apply = _as_apply(self.operator)


@dataclass
class MgHierarchy:
    levels: list[Level]
    coarse_lu: tuple = field(repr=False)
    mode: str = "geometric"
    nu_pre: int = 1
    nu_post: int = 1

    @property
    def orders(self) -> list[tuple[int, int]]:
        return [(lv.n1, lv.n2) for lv in self.levels]

    def coarse_solve(self, b) -> np.ndarray:
        return sla.lu_solve(self.coarse_lu, b)

    def __call__(self, b) -> np.ndarray:
        return vcycle(self, b)


def vcycle(h: MgHierarchy, b, x0=None, level: int = 0) -> np.ndarray:
    """One V-cycle for ``A_level x = b`` (zero initial guess by default)."""
    b = np.asarray(b, dtype=float)
    if level == len(h.levels) - 1:
        return h.coarse_solve(b)
    lv = h.levels[level]
    if x0 is None:
        x = np.zeros_like(b)
        pre = h.nu_pre
        if pre > 0:
            # first sweep from zero needs no matvec
            x = lv.omega * b / lv.diag
            pre -= 1
    else:
        x = np.array(x0, dtype=float)
        pre = h.nu_pre
    for _ in range(pre):
        x = jacobi_sweep(lv.diag, lv.apply, x, b, lv.omega)
    r = b - lv.apply(x)
    rc = lv.rhs_scale * lv.transfer.restrict(r)
    x = x + lv.transfer.prolong(vcycle(h, rc, None, level + 1))
    for _ in range(h.nu_post):
        x = jacobi_sweep(lv.diag, lv.apply, x, b, lv.omega)
    return x


def _needs_coarsening(n1: int, n2: int) -> bool:
    return max(n1, n2) > COARSEST


def build_geometric_hierarchy(p: FdeProblem, g: Grid, m: int, omega: float = 0.9,
                              nu_pre: int = 1, nu_post: int = 1, t: float | None = None) -> MgHierarchy:
    """Rediscretize ``M`` at time ``t^(m)`` on successively coarser grids."""
    t = g.t(m) if t is None else t
    levels: list[Level] = []
    grid = g
    op = assemble_operator(p, grid, t)
    while True:
        lv = Level(grid.n1, grid.n2, op, op.diagonal(), omega)
        levels.append(lv)
        if not _needs_coarsening(grid.n1, grid.n2) or min(grid.n1, grid.n2) < 2:
            break
        coarse = grid.coarsen()
        lv.transfer = GridTransfer.build(grid.n1, grid.n2)
        lv.rhs_scale = (coarse.hx / grid.hx) ** p.alpha
        grid, op = coarse, assemble_operator(p, coarse, t)
    lu = sla.lu_factor(dense_assemble(levels[-1].operator))
    return MgHierarchy(levels, lu, "geometric", nu_pre, nu_post)


def galerkin_coarse(A, transfer: GridTransfer):
    """``P^T A P`` (sparse in, sparse out; dense in, dense out)."""
    P = transfer.P
    if sp.issparse(A):
        return sp.csr_array(P.T @ A @ P)
    return np.asarray(P.T @ (P.T @ np.asarray(A).T).T)


def build_galerkin_hierarchy(A, n1: int, n2: int, omega: float = 0.9,
                             nu_pre: int = 1, nu_post: int = 1, dense_cap: int = 4096) -> MgHierarchy:
    """Galerkin hierarchy of an explicit (sparse or dense) matrix."""
    if not sp.issparse(A):
        A = np.asarray(A, dtype=float)
        if A.shape[0] > dense_cap:
            raise ValueError(f"dense Galerkin input of order {A.shape[0]} exceeds cap {dense_cap}")
    else:
        A = sp.csr_array(A)
    levels: list[Level] = []
    while True:
        lv = Level(n1, n2, A, _diag_of(A), omega)
        levels.append(lv)
        if not _needs_coarsening(n1, n2) or min(n1, n2) < 2:
            break
        lv.transfer = GridTransfer.build(n1, n2)
        lv.rhs_scale = 4.0
        A = galerkin_coarse(A, lv.transfer)
        n1, n2 = coarse_size(n1), coarse_size(n2)
    lu = sla.lu_factor(_dense_of(levels[-1].operator))
    return MgHierarchy(levels, lu, "galerkin", nu_pre, nu_post)


def two_grid(A, t: GridTransfer, b, x0, nu: int = 1, omega: float = 0.9,
             coarse_mode: str = "galerkin", Ac=None) -> np.ndarray:
    """Coarse-grid correction with the exact ``P^T A P`` followed by ``nu`` Jacobi sweeps."""
    if coarse_mode != "galerkin":
        raise ValueError("two_grid supports coarse_mode='galerkin' only")
    apply = _as_apply(A)
    diag = _diag_of(A)
    if Ac is None:
        Ac = galerkin_coarse(A if sp.issparse(A) else _dense_of(A), t)
    Ac = Ac.toarray() if sp.issparse(Ac) else np.asarray(Ac)
    x = np.array(x0, dtype=float)
    r = b - apply(x)
    dk = t.P.T @ r
    y = sla.solve(Ac, dk)
    x = x + t.P @ y
    for _ in range(nu):
        x = jacobi_sweep(diag, apply, x, b, omega)
    return x


def tgm_iteration_matrix(A: np.ndarray, P: np.ndarray, omega: float, nu: int = 1) -> np.ndarray:
    """``S^nu [I - P (P^T A P)^{-1} P^T A]`` with ``S = I - omega D^{-1} A``."""
    N = A.shape[0]
    S = np.eye(N) - omega * A / np.diag(A)[:, None]
    C = np.eye(N) - P @ np.linalg.solve(P.T @ A @ P, P.T @ A)
    return np.linalg.matrix_power(S, nu) @ C


@dataclass
class TgmVerificationReport:
    n: int
    contraction_estimates: np.ndarray
    delta_est: float
    xi_est: float
    tgm_norm: float
    bound: float

    @property
    def xi_ge_delta(self) -> bool:
        return self.xi_est >= self.delta_est

    @property
    def within_bound(self) -> bool:
        return self.tgm_norm <= self.bound + 0.05 and bool(np.all(self.contraction_estimates <= self.bound + 0.05))


def verify_tgm_theory(A, t: GridTransfer | np.ndarray, omega: float, runs: int = 20,
                      seed: int = 0, iters: int = 5) -> TgmVerificationReport:
    """Estimate the smoothing and approximation constants of a two-grid method.

    ``delta`` is the smallest generalized eigenvalue of
    ``(A - S^T A S, A D^{-1} A)`` and ``xi`` the largest of
    ``(D - D P (P^T D P)^{-1} P^T D, A)``; both are the sharp constants of the
    two inequalities.  ``tgm_norm`` is the exact A-norm of the iteration
    matrix and ``contraction_estimates`` are per-run error reduction factors
    (geometric mean over ``iters`` steps from random starts).
    """
    A = _dense_of(A)
    P = t.P.toarray() if isinstance(t, GridTransfer) else np.asarray(t, dtype=float)
    N = A.shape[0]
    d = np.diag(A)
    D = np.diag(d)
    S = np.eye(N) - omega * A / d[:, None]
    lhs = A - S.T @ A @ S
    delta = float(sla.eigh(lhs, A @ np.diag(1 / d) @ A, eigvals_only=True)[0])
    DP = D @ P
    Q = D - DP @ np.linalg.solve(P.T @ DP, DP.T)
    xi = float(sla.eigh((Q + Q.T) / 2, A, eigvals_only=True)[-1])

    TG = tgm_iteration_matrix(A, P, omega, nu=1)
    L = np.linalg.cholesky(A)  # A = L L^T, ||X||_A = ||L^T X L^{-T}||_2
    tgm_norm = float(np.linalg.norm(L.T @ TG @ np.linalg.inv(L.T), 2))
    bound = float(np.sqrt(max(0.0, 1 - delta / xi)))

    rng = np.random.default_rng(seed)
    anorm = lambda v: np.sqrt(v @ A @ v)
    est = []
    for _ in range(runs):
        e = rng.standard_normal(N)
        e0 = anorm(e)
        for _ in range(iters):
            e = TG @ e
        est.append((anorm(e) / e0) ** (1 / iters))
    return TgmVerificationReport(int(round(np.sqrt(N))), np.array(est), delta, xi, tgm_norm, bound)
