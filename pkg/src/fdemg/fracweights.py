"""Fractional binomial coefficients and WSGD weights.

The weights ``w_k`` define the discrete Riemann-Liouville derivative used by
the CN-WSGD scheme (shift parameters ``(p, q) = (1, 0)``).  Tables are cached
per ``(gamma, K)`` and returned as read-only arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

#: Below this order the CN-WSGD matrix is no longer guaranteed to be an M-matrix.
GAMMA0 = (-1.0 + math.sqrt(17.0)) / 2.0


def check_order(gamma: float) -> float:
    gamma = float(gamma)
    if not (1.0 < gamma <= 2.0):
        raise ValueError(f"fractional order must lie in (1, 2], got {gamma!r}")
    return gamma


@lru_cache(maxsize=128)
def _binom(gamma: float, K: int) -> np.ndarray:
    k = np.arange(1, K + 1, dtype=float)
    g = np.empty(K + 1)
    g[0] = 1.0
    g[1:] = np.cumprod(1.0 - (gamma + 1.0) / k)
    g.setflags(write=False)
    return g


def binom_coeffs(gamma: float, K: int) -> np.ndarray:
    """Alternating binomials ``g_k = (-1)^k binom(gamma, k)`` for ``k = 0..K``.

    Uses the recurrence ``g_k = g_{k-1} (1 - (gamma + 1) / k)``, which never
    forms a factorial and so stays finite for very large ``K``.
    """
    gamma = check_order(gamma)
    if int(K) < 1:
        raise ValueError("K must be >= 1")
    return _binom(gamma, int(K))


def binom_product(gamma: float, k: int) -> float:
    """Direct product formula for ``g_k`` in exact rational arithmetic.

    Slow reference used by tests; ``gamma`` is taken as its exact binary value
    and the result is rounded once.
    """
    G = Fraction(float(gamma))
    out = Fraction(1)
    for j in range(k):
        out *= (G - j) / (j + 1)
    return float((-1) ** k * out)


@dataclass(frozen=True)
class WeightTable:
    gamma: float
    g: np.ndarray
    w: np.ndarray

    @property
    def K(self) -> int:
        return len(self.w) - 1

    def invariant_report(self) -> dict[str, bool]:
        """Evaluate the weight properties, one boolean per property.

        For ``gamma == 2`` the weights are ``[1, -2, 1, 0, ...]`` and the
        partial sums are exactly zero from ``n = 2`` on, so the strict
        inequality is replaced by ``<= 0`` there.
        """
        gamma, g, w = self.gamma, self.g, self.w
        K = self.K
        psum = self.partial_sums()
        eps = np.finfo(float).eps
        naive_gap = np.abs(np.cumsum(w) - psum)
        tail = w[3:]
        rep = {
            "g0_is_one": g[0] == 1.0,
            "g1_is_minus_gamma": math.isclose(g[1], -gamma, rel_tol=0, abs_tol=1e-15),
            "w0_is_half_gamma": math.isclose(w[0], gamma / 2, rel_tol=0, abs_tol=1e-15),
            "w1_closed_form": math.isclose(
                w[1], (2 - gamma - gamma**2) / 2, rel_tol=0, abs_tol=1e-14
            ),
            "w1_negative": bool(w[1] < 0),
            "w0_at_most_one": bool(w[0] <= 1.0),
            "tail_nonnegative": bool(np.all(tail >= 0)),
            "partial_sums_consistent": bool(np.all(naive_gap <= 4 * eps * (np.arange(K + 1) + 1) * np.abs(w).max())),
            "tail_nonincreasing_from_w0": bool(
                K < 3 or (w[0] >= tail[0] and np.all(np.diff(tail) <= 0))
            ),
        }
        if K >= 2:
            rep["w2_closed_form"] = math.isclose(
                w[2], gamma * (gamma**2 + gamma - 4) / 4, rel_tol=0, abs_tol=1e-14
            )
            if gamma < 2:
                rep["partial_sums_negative"] = bool(np.all(psum[2:] < 0))
            else:
                rep["partial_sums_negative"] = bool(np.all(psum[2:] <= 0))
        if K >= 6 and gamma < 2:
            k = np.arange(3, K + 1)
            scaled = np.abs(tail) * k ** (gamma + 1)
            half = len(scaled) // 2
            # sup of |w_k| k^(gamma+1) over the far tail must not exceed the
            # sup over the head: the sequence has settled to its constant.
            rep["decay_rate"] = bool(
                np.all(np.isfinite(scaled)) and scaled[half:].max() <= 1.0001 * scaled[:half].max()
            )
        return rep

    def partial_sums(self) -> np.ndarray:
        """``sum_{j<=n} w_j`` for ``n = 0..K`` without cancellation.

        Uses ``sum_{j<=n} g_j^(gamma) = g_n^(gamma-1)``, so each partial sum
        is a two-term combination with full relative accuracy.
        """
        h = np.empty(self.K + 1)
        h[0] = 1.0
        h[1:] = np.cumprod(1.0 - self.gamma / np.arange(1, self.K + 1))
        out = np.empty_like(h)
        out[0] = self.w[0]
        out[1:] = self.gamma / 2 * h[1:] + (2 - self.gamma) / 2 * h[:-1]
        return out

    def invariants_hold(self) -> bool:
        return all(self.invariant_report().values())


@lru_cache(maxsize=128)
def _weights(gamma: float, K: int) -> WeightTable:
    g = _binom(gamma, K)
    w = np.empty(K + 1)
    w[0] = gamma / 2 * g[0]
    w[1:] = gamma / 2 * g[1:] + (2 - gamma) / 2 * g[:-1]
    w.setflags(write=False)
    return WeightTable(gamma=gamma, g=g, w=w)


def wsgd_weights(gamma: float, K: int) -> WeightTable:
    """WSGD weights ``w_0..w_K`` for order ``gamma``."""
    gamma = check_order(gamma)
    if int(K) < 2:
        raise ValueError("K must be >= 2")
    return _weights(gamma, int(K))


def is_m_matrix_regime(alpha: float, beta: float) -> bool:
    """True when both orders are at least ``GAMMA0`` (so ``w_2 >= 0``)."""
    return min(check_order(alpha), check_order(beta)) >= GAMMA0
