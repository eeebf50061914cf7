"""Numerical property suites behind ``fdemg verify``.

Each suite returns a list of :class:`CheckResult`; a suite passes when every
check does.  Sizes are small enough for the whole set to run in a few minutes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fracweights import binom_coeffs, binom_product, wsgd_weights
from .multigrid import GridTransfer, jacobi_sweep, smoothing_bound_omega, tgm_iteration_matrix, verify_tgm_theory
from .structured_ops import StructuredFdeOperator, dense_assemble
from .symbols import (
    CoeffSet, F_upper_bound, check_F_zero_order, check_limsup_ratio_h_over_F, check_projector_condition,
    distribution_distances, eval_F, eval_f_gamma, eval_f_series, eval_q_gamma, q_zero_order_bracket,
)

GAMMA_GRID = tuple(np.round(np.arange(1.05, 2.0, 0.05), 2).tolist()) + (2.0,)
SUITES = ("weights", "symbols", "distribution", "tgm", "all")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float = float("nan")
    detail: str = ""


# -- weights -------------------------------------------------------------------

def weights_suite(K: int = 10_000) -> list[CheckResult]:
    out = []
    for g in GAMMA_GRID:
        rep = wsgd_weights(g, K).invariant_report()
        bad = [k for k, v in rep.items() if not v]
        out.append(CheckResult("weights", f"invariants[gamma={g}]", not bad, float(len(bad)), ",".join(bad)))
    for g in GAMMA_GRID[:-1]:
        worst = 0.0
        for KK in (1_000, K):
            worst = max(worst, abs(wsgd_weights(g, KK).w.sum()) * KK**g)
        out.append(CheckResult("weights", f"sum_decay[gamma={g}]", worst <= 10.0, worst, "|sum w| K^gamma"))
    for g in (1.1, 1.5, 1.8, 1.95):
        rec = binom_coeffs(g, 1000)
        ks = np.arange(0, 1001, 7)
        ref = np.array([binom_product(g, int(k)) for k in ks])
        err = float(np.max(np.abs(rec[ks] - ref) / np.maximum(np.abs(ref), np.finfo(float).tiny)))
        out.append(CheckResult("weights", f"recurrence_vs_product[gamma={g}]", err <= 1e-14, err))
    return out


# -- symbols -------------------------------------------------------------------

_EX1_COEFFS = CoeffSet(
    d_plus=lambda x, y: math.gamma(1.2) * (1 + x) ** 1.8 * (1 + y) ** 2,
    d_minus=lambda x, y: math.gamma(1.2) * (3 - x) ** 1.8 * (3 - y) ** 2,
    e_plus=lambda x, y: math.gamma(1.4) * (1 + x) ** 2 * (1 + y) ** 1.6,
    e_minus=lambda x, y: math.gamma(1.4) * (3 - x) ** 2 * (3 - y) ** 1.6,
)


def symbols_suite(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    xi = np.linspace(-np.pi, np.pi, 256)
    for g in (1.1, 1.5, 1.8):
        err = float(np.max(np.abs(eval_f_gamma(g, xi) - eval_f_series(g, xi, 100_000))))
        out.append(CheckResult("symbols", f"f_closed_vs_series[gamma={g}]", err <= 1e-6, err))
    r = rng.uniform(-np.pi, np.pi, 1000)
    for g in (1.1, 1.5, 1.9):
        q, qm = eval_q_gamma(g, r), eval_q_gamma(g, -r)
        asym = float(np.max(np.abs(q - qm)))
        out.append(CheckResult("symbols", f"q_even[gamma={g}]", asym <= 1e-13 * max(1.0, q.max()), asym))
        out.append(CheckResult("symbols", f"q_nonnegative[gamma={g}]", bool(eval_q_gamma(g, xi).min() >= 0),
                               float(eval_q_gamma(g, xi).min())))
        c1, c2 = q_zero_order_bracket(g)
        out.append(CheckResult("symbols", f"q_zero_order[gamma={g}]", 0 < c1 <= c2 < np.inf and c2 / c1 < 2,
                               c2 / c1, f"bracket [{c1:.5e}, {c2:.5e}]"))
    t = np.linspace(-np.pi, np.pi, 512)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    for (a, b, d, e, sr) in ((1.8, 1.6, 1.0, 1.0, 1.0), (1.3, 1.7, 2.0, 0.5, 0.7)):
        F = eval_F(a, b, d, e, sr, T1, T2)
        ub = F_upper_bound(a, b, d, e, sr)
        out.append(CheckResult("symbols", f"F_nonnegative[{a},{b}]", bool(F.min() >= 0), float(F.min())))
        out.append(CheckResult("symbols", f"F_sup_bound[{a},{b}]", bool(F.max() <= ub * (1 + 1e-12)),
                               float(F.max() / ub)))
        z = check_F_zero_order(a, b, d, e, sr)
        out.append(CheckResult("symbols", f"F_zero_order[{a},{b}]", z.verdict, z.sup_estimate))
    cases = [(1.8, 1.6, 1.0, 1.0, 1.0), (1.5, 1.5, 1.0, 1.0, 1.0), (1.1, 1.9, 1.0, 1.0, 0.5), (1.95, 1.05, 2.0, 1.0, 2.0)]
    for mode in ("tgm", "vcycle"):
        for (a, b, d, e, sr) in cases:
            rep = check_projector_condition(a, b, d, e, sr, mode=mode)
            out.append(CheckResult("symbols", f"projector_{mode}[{a},{b}]", rep.verdict, rep.sup_estimate))
    for x in ((0.5, 0.5), (1.0, 1.5)):
        rep = check_limsup_ratio_h_over_F(1.8, 1.6, _EX1_COEFFS, 1.0, 1.0, 1.0, x)
        err = abs(rep.extra["estimate"] - rep.target) / abs(rep.target)
        out.append(CheckResult("symbols", f"h_over_F_limit[x={x}]", rep.verdict, err))
    rep = check_limsup_ratio_h_over_F(1.6, 1.8, CoeffSet.constant(1.5, 0.5), 1.5, 0.5, 1.0, (0.3, 0.3))
    out.append(CheckResult("symbols", "h_over_F_constant_is_one", rep.verdict and abs(rep.target - 1) < 1e-14,
                           abs(rep.extra["estimate"] - 1)))
    return out


# -- distribution --------------------------------------------------------------

def distribution_suite(sizes=(8, 16, 32)) -> list[CheckResult]:
    out = []
    for a, b in ((1.8, 1.6), (1.5, 1.5), (1.2, 1.9)):
        dist = distribution_distances(a, b, sizes=sizes)
        ok = all(x > y for x, y in zip(dist, dist[1:]))
        out.append(CheckResult("distribution", f"ecdf_decreasing[{a},{b}]", ok, dist[-1],
                               " ".join(f"{v:.5e}" for v in dist)))
    return out


# -- two-grid theory -----------------------------------------------------------

def _const_matrix(alpha, beta, n, d=1.0, e=1.0, s_over_r=1.0, inv_r=0.0) -> np.ndarray:
    """Dense symmetric ``inv_r I + T(F)`` for equal left/right constant coefficients."""
    op = StructuredFdeOperator.from_constants(alpha, beta, n, n, inv_r, s_over_r, d, d, e, e)
    A = dense_assemble(op)
    return (A + A.T) / 2


def _anorm(A, v):
    return float(np.sqrt(v @ A @ v))


def tgm_suite(seed: int = 0, n: int = 15) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    t = GridTransfer.build(n, n)
    P = t.P.toarray()
    for a, b in ((2.0, 2.0), (1.8, 1.6), (1.3, 1.7)):
        A = _const_matrix(a, b, n)
        omega = smoothing_bound_omega(a, b, 1.0, 1.0, 1.0, 0.0)
        rep = verify_tgm_theory(A, t, omega, seed=seed)
        tag = f"[{a},{b}]"
        out.append(CheckResult("tgm", f"delta_le_xi{tag}", rep.delta_est > 0 and rep.xi_ge_delta,
                               rep.delta_est / rep.xi_est, f"delta={rep.delta_est:.5e} xi={rep.xi_est:.5e}"))
        worst = float(max(rep.tgm_norm, rep.contraction_estimates.max()))
        out.append(CheckResult("tgm", f"contraction_bound{tag}", rep.within_bound and worst < 1,
                               worst, f"bound={rep.bound:.5e}"))

        S_apply = lambda v: A @ v
        diag = np.diag(A)
        worst_ratio = 0.0
        for _ in range(100):
            e0 = rng.standard_normal(A.shape[0])
            e1 = jacobi_sweep(diag, S_apply, e0, np.zeros_like(e0), omega)
            worst_ratio = max(worst_ratio, _anorm(A, e1) / _anorm(A, e0))
        out.append(CheckResult("tgm", f"jacobi_anorm_nonincrease{tag}", worst_ratio <= 1 + 1e-12, worst_ratio,
                               f"omega={omega:.5e}"))

        TG = tgm_iteration_matrix(A, P, omega)
        worst_tg = 0.0
        for _ in range(100):
            e0 = rng.standard_normal(A.shape[0])
            worst_tg = max(worst_tg, _anorm(A, TG @ e0) / _anorm(A, e0))
        out.append(CheckResult("tgm", f"tgm_anorm_nonincrease{tag}", worst_tg <= 1 + 1e-12, worst_tg))
    # contraction stays put as the grid is refined
    norms = []
    for m in (7, 15, 31):
        A = _const_matrix(1.8, 1.6, m)
        omega = smoothing_bound_omega(1.8, 1.6, 1.0, 1.0, 1.0, 0.0)
        TG = tgm_iteration_matrix(A, GridTransfer.build(m, m).P.toarray(), omega)
        L = np.linalg.cholesky(A)
        norms.append(float(np.linalg.norm(L.T @ TG @ np.linalg.inv(L.T), 2)))
    spread = max(norms) - min(norms)
    out.append(CheckResult("tgm", "tgm_norm_stable_in_n", max(norms) < 1 and spread < 0.1, spread,
                           " ".join(f"{v:.5e}" for v in norms)))
    return out


_RUNNERS: dict[str, Callable[..., list[CheckResult]]] = {
    "weights": lambda seed: weights_suite(),
    "symbols": lambda seed: symbols_suite(seed),
    "distribution": lambda seed: distribution_suite(),
    "tgm": lambda seed: tgm_suite(seed),
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    names = list(_RUNNERS) if name == "all" else [name]
    return [c for s in names for c in _RUNNERS[s](seed)]
