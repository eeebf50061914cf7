"""Restarted GMRES with left preconditioning.

``restart=0`` runs unrestarted GMRES; the Krylov basis then grows on demand.
Convergence is declared on the preconditioned relative residual
``||M^{-1}(b - A x)|| / ||M^{-1} b||``; the reported iteration count is the
cumulative number of inner (Arnoldi) steps over all restart cycles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

Operator = Callable[[np.ndarray], np.ndarray]

_REORTH_TOL = 1e-8


@dataclass
class SolverConfig:
    tol: float = 1e-7
    restart: int = 20  # 0 = no restart
    max_outer: int = 100
    preconditioner: Optional[Operator] = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.restart < 0:
            raise ValueError("restart must be >= 0")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")


@dataclass
class KrylovResult:
    solution: np.ndarray
    total_iterations: int
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    h = np.hypot(a, b)
    return a / h, b / h


def gmres(apply_A: Operator, b, config: SolverConfig | None = None, x0=None) -> KrylovResult:
    config = config or SolverConfig()
    M = config.preconditioner or (lambda v: v)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)

    bnorm = np.linalg.norm(M(b))
    if bnorm == 0.0:
        return KrylovResult(np.zeros(n), 0, [0.0], True)
    target = config.tol * bnorm
    m = config.restart if config.restart > 0 else n
    total = 0
    history: list[float] = []

    r = M(b - apply_A(x)) if x.any() else M(b)
    beta = np.linalg.norm(r)
    history.append(beta / bnorm)
    if beta <= target:
        return KrylovResult(x, 0, history, True)

    for _ in range(config.max_outer):
        cap = min(m, 64)
        V = np.zeros((cap + 1, n))
        Hcols: list[np.ndarray] = []
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        j_done = 0
        for j in range(m):
            if j + 1 >= V.shape[0]:
                V = np.vstack([V, np.zeros((min(V.shape[0], m + 1 - V.shape[0]), n))])
            w = M(apply_A(V[j]))
            wnorm0 = np.linalg.norm(w)
            Vj = V[: j + 1]
            h = Vj @ w
            w -= h @ Vj
            hn = np.linalg.norm(w)
            # second Gram-Schmidt pass when the projection lost accuracy
            if hn > 0:
                corr = Vj @ w
                if np.abs(corr).max() > _REORTH_TOL * hn:
                    h += corr
                    w -= corr @ Vj
                    hn = np.linalg.norm(w)
            col = np.zeros(j + 2)
            col[: j + 1] = h
            col[j + 1] = hn
            for i in range(j):
                hi, hi1 = col[i], col[i + 1]
                col[i] = cs[i] * hi + sn[i] * hi1
                col[i + 1] = -sn[i] * hi + cs[i] * hi1
            cs[j], sn[j] = _givens(col[j], col[j + 1])
            col[j] = cs[j] * col[j] + sn[j] * col[j + 1]
            col[j + 1] = 0.0
            Hcols.append(col)
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            total += 1
            j_done = j + 1
            history.append(abs(g[j + 1]) / bnorm)
            breakdown = hn <= 1e-14 * max(wnorm0, 1.0)
            if abs(g[j + 1]) <= target or breakdown:
                break
            V[j + 1] = w / hn

        R = np.zeros((j_done, j_done))
        for k, col in enumerate(Hcols):
            R[: k + 1, k] = col[: k + 1]
        y = sla.solve_triangular(R, g[:j_done]) if j_done else np.zeros(0)
        x = x + y @ V[:j_done]
        r = M(b - apply_A(x))
        beta = np.linalg.norm(r)
        history.append(beta / bnorm)
        if beta <= target:
            return KrylovResult(x, total, history, True)
        if beta == 0.0:
            return KrylovResult(x, total, history, True)
    return KrylovResult(x, total, history, False)
