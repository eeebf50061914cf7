"""Multigrid preconditioners for the CN-WSGD systems.

``P2``            one Galerkin V-cycle on the banded Laplacian-type matrix
``P2 exact``      sparse direct solve with the same matrix
``MGM``           one geometric V-cycle on ``M``
``MGM Galerkin``  one Galerkin V-cycle on the explicit sparse ``M``

The banded matrix is taken as ``M`` evaluated at ``alpha = beta = 2`` with the
same diffusion diagonals and the same ``1/r``, ``s/r``, which makes it
positive definite in the constant-coefficient case.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .multigrid import MgHierarchy, build_galerkin_hierarchy, build_geometric_hierarchy, vcycle
from .problems import FdeProblem, Grid
from .structured_ops import StructuredFdeOperator, ToeplitzBlock

KINDS = ("none", "p2", "p2-exact", "mgm", "mgm-galerkin")


@dataclass
class BandedP2:
    n1: int
    n2: int
    matrix: sp.csr_array
    hierarchy: MgHierarchy | None = None
    lu: object = field(default=None, repr=False)

    def nonzero_diagonals(self) -> list[int]:
        coo = self.matrix.tocoo()
        return sorted(set((coo.col - coo.row)[coo.data != 0].tolist()))


def build_p2_matrix(inv_r: float, s_over_r: float, n1: int, n2: int, Dp, Dm, Ep, Em) -> sp.csr_array:
    L1 = ToeplitzBlock.from_order(2.0, n1).sparse()
    L2 = ToeplitzBlock.from_order(2.0, n2).sparse()
    I1 = sp.identity(n1, format="csr")
    I2 = sp.identity(n2, format="csr")
    dg = sp.diags_array
    Px = dg(np.asarray(Dp) + np.asarray(Dm)) @ sp.kron(I2, L1)
    Py = dg(np.asarray(Ep) + np.asarray(Em)) @ sp.kron(L2, I1)
    return sp.csr_array(inv_r * sp.identity(n1 * n2) + Px + s_over_r * Py)


def build_p2(op: StructuredFdeOperator, omega: float = 0.9, hierarchy: bool = True,
             exact: bool = False) -> BandedP2:
    """Banded preconditioner sharing the diagonals and constants of ``op``."""
    A = build_p2_matrix(op.inv_r, op.s_over_r, op.n1, op.n2, op.Dp, op.Dm, op.Ep, op.Em)
    p = BandedP2(op.n1, op.n2, A)
    if hierarchy:
        p.hierarchy = build_galerkin_hierarchy(A, op.n1, op.n2, omega=omega)
    if exact:
        p.lu = spla.splu(sp.csc_matrix(A))
    return p


def apply_p2_precond(p: BandedP2, v, cycles: int = 1) -> np.ndarray:
    x = vcycle(p.hierarchy, v)
    for _ in range(cycles - 1):
        x = vcycle(p.hierarchy, v, x0=x)
    return x


def apply_p2_exact(p: BandedP2, v) -> np.ndarray:
    if p.lu is None:
        p.lu = spla.splu(sp.csc_matrix(p.matrix))
    return p.lu.solve(np.asarray(v, dtype=float))


def apply_mgm_precond(h: MgHierarchy, v, cycles: int = 1) -> np.ndarray:
    x = vcycle(h, v)
    for _ in range(cycles - 1):
        x = vcycle(h, v, x0=x)
    return x


def build_mgm_galerkin(op: StructuredFdeOperator, omega: float = 0.9) -> MgHierarchy:
    return build_galerkin_hierarchy(op.to_sparse(), op.n1, op.n2, omega=omega)


def apply_mgm_galerkin_exact(h: MgHierarchy, v) -> np.ndarray:
    return vcycle(h, v)


def make_preconditioner(kind: str, p: FdeProblem, g: Grid, op: StructuredFdeOperator, m: int,
                        omega: float = 0.9, cycles: int = 1):
    """Callable ``v -> z`` approximating ``M^{-1} v`` for time step ``m``."""
    if kind == "none":
        return None
    if kind == "p2":
        bp = build_p2(op, omega=omega)
        return lambda v: apply_p2_precond(bp, v, cycles)
    if kind == "p2-exact":
        bp = build_p2(op, hierarchy=False, exact=True)
        return lambda v: apply_p2_exact(bp, v)
    if kind == "mgm":
        h = build_geometric_hierarchy(p, g, m, omega=omega)
        return lambda v: apply_mgm_precond(h, v, cycles)
    if kind == "mgm-galerkin":
        h = build_mgm_galerkin(op, omega=omega)
        return lambda v: apply_mgm_precond(h, v, cycles)
    raise ValueError(f"unknown preconditioner {kind!r}; choose from {KINDS}")
