"""Time marching of the CN-WSGD scheme with preconditioned GMRES."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .krylov import SolverConfig, gmres
from .precond import make_preconditioner
from .problems import (  # noqa: F401  (re-exported)
    FdeProblem, Grid, assemble_operator, assemble_step_operator, builtin_examples, get_example,
)

log = logging.getLogger(__name__)


@dataclass
class SolveReport:
    per_step_iterations: list[int] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)
    final_error_inf: float | None = None
    wall_time: float = 0.0
    solution: np.ndarray | None = field(default=None, repr=False)

    @property
    def avg_iterations(self) -> float:
        return float(np.mean(self.per_step_iterations)) if self.per_step_iterations else 0.0

    @property
    def all_converged(self) -> bool:
        return all(self.converged)


def assemble_rhs(p: FdeProblem, g: Grid, m: int, u_prev, op_prev=None) -> np.ndarray:
    """``(1/r I - A_x - (s/r) A_y)^(m-1) u^(m-1) + 2 h_x^alpha v^(m-1/2)``."""
    if op_prev is None:
        op_prev = assemble_step_operator(p, g, m - 1)
    X, Y = g.mesh()
    v = p.rhs_source(X, Y, g.t(m - 0.5))
    return op_prev.apply_rhs_operator(u_prev) + 2 * g.hx**p.alpha * v


def error_inf(u_num, p: FdeProblem, g: Grid, t: float) -> float:
    if p.exact is None:
        raise ValueError(f"problem {p.name!r} has no exact solution")
    X, Y = g.mesh()
    return float(np.max(np.abs(np.asarray(u_num) - p.exact(X, Y, t))))


def time_march(p: FdeProblem, g: Grid, cfg: SolverConfig | None = None, precond: str = "none",
               omega: float = 0.9, cycles: int = 1) -> SolveReport:
    """Solve ``M^(m) u^(m) = b^(m)`` for ``m = 1..M`` from a zero initial guess each step."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    X, Y = g.mesh()
    u = np.asarray(p.initial(X, Y), dtype=float)
    rep = SolveReport()
    op_prev = assemble_step_operator(p, g, 0)
    pc = None
    for m in range(1, g.M + 1):
        op = op_prev if not p.time_dependent else assemble_step_operator(p, g, m)
        if pc is None or p.time_dependent:
            pc = make_preconditioner(precond, p, g, op, m, omega=omega, cycles=cycles)
        b = assemble_rhs(p, g, m, u, op_prev)
        step_cfg = SolverConfig(cfg.tol, cfg.restart, cfg.max_outer, pc)
        res = gmres(op.apply_M, b, step_cfg)
        if not res.converged:
            log.warning("step %d did not converge (residual %.3e)", m, res.final_residual)
        rep.per_step_iterations.append(res.total_iterations)
        rep.residuals.append(res.final_residual)
        rep.converged.append(res.converged)
        u = res.solution
        op_prev = op
    rep.wall_time = time.perf_counter() - t0
    rep.solution = u
    if p.exact is not None:
        rep.final_error_inf = error_inf(u, p, g, p.T)
    return rep


def solve_example(k: int, n: int, precond: str = "none", M: int | None = None, **kw) -> SolveReport:
    p = get_example(k)
    return time_march(p, Grid.for_problem(p, n, n, M or n), precond=precond, **kw)
