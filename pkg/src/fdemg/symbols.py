"""Generating functions of the CN-WSGD matrices and numerical limit checks.

All evaluators are vectorised over the angle arguments.  The factor
``1 + exp(i(xi + pi)) = 1 - exp(i xi)`` is evaluated as
``-2i sin(xi/2) exp(i xi/2)`` so that tiny angles keep full relative accuracy;
its real part is never negative, so the principal branch of the complex power
is continuous on ``[-pi, pi]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fracweights import check_order, wsgd_weights

Coeff = Callable[[float, float], float]


def _one_minus_exp(xi):
    xi = np.asarray(xi, dtype=float)
    return -2j * np.sin(xi / 2) * np.exp(0.5j * xi)


def eval_f_gamma(gamma: float, xi):
    """Symbol ``f_gamma`` of the Toeplitz block of order ``gamma``."""
    xi = np.asarray(xi, dtype=float)
    z = _one_minus_exp(xi)
    lead = (2 - gamma * (1 - np.exp(-1j * xi))) / 2
    # z ** gamma with z == 0 is fine (gives 0) for gamma > 0
    return -lead * z**gamma


def eval_f_series(gamma: float, xi, K: int, chunk: int = 20000):
    """Truncated Fourier series ``-sum_{k=-1}^{K} w_{k+1} e^{i k xi}``."""
    w = wsgd_weights(gamma, K + 1).w
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.zeros(xi.shape, dtype=complex)
    for start in range(0, K + 2, chunk):
        k = np.arange(start - 1, min(start - 1 + chunk, K + 1))
        out -= np.exp(1j * np.outer(xi, k)) @ w[k + 1]
    return out


def eval_q_gamma(gamma: float, xi):
    """Real symbol ``q_gamma = f_gamma(xi) + f_gamma(-xi) = 2 Re f_gamma(xi)``."""
    return 2.0 * eval_f_gamma(gamma, xi).real


def eval_F(alpha, beta, d, e, s_over_r, theta1, theta2):
    """Distribution symbol ``d q_alpha(theta1) + e (s/r) q_beta(theta2)``."""
    return d * eval_q_gamma(alpha, theta1) + e * s_over_r * eval_q_gamma(beta, theta2)


def F_upper_bound(alpha, beta, d, e, s_over_r) -> float:
    """``d (alpha-1) 2^(alpha+1) + e (s/r) (beta-1) 2^(beta+1)``, i.e. ``F(pi, pi)``."""
    return d * (alpha - 1) * 2 ** (alpha + 1) + e * s_over_r * (beta - 1) * 2 ** (beta + 1)


def eval_phi(alpha, beta, inv_r, s_over_r, dp, dm, ep, em, theta1, theta2):
    """BTTB symbol of the constant-coefficient matrix ``M``."""
    return (
        inv_r
        + dp * eval_f_gamma(alpha, theta1)
        + dm * eval_f_gamma(alpha, -np.asarray(theta1))
        + s_over_r * (ep * eval_f_gamma(beta, theta2) + em * eval_f_gamma(beta, -np.asarray(theta2)))
    )


@dataclass(frozen=True)
class CoeffSet:
    """Spatial diffusion coefficients ``d_+, d_-, e_+, e_-`` frozen at one time."""

    d_plus: Coeff
    d_minus: Coeff
    e_plus: Coeff
    e_minus: Coeff

    @classmethod
    def constant(cls, d: float, e: float) -> "CoeffSet":
        return cls(lambda x, y: d, lambda x, y: d, lambda x, y: e, lambda x, y: e)


def eval_h(alpha, beta, coeffs: CoeffSet, s_over_r, x, theta1, theta2):
    """GLT symbol ``g_alpha(x, theta1) + (s/r) g_beta(x, theta2)`` at point ``x``."""
    px, py = x
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    g_a = coeffs.d_plus(px, py) * eval_f_gamma(alpha, t1) + coeffs.d_minus(px, py) * eval_f_gamma(alpha, -t1)
    g_b = coeffs.e_plus(px, py) * eval_f_gamma(beta, t2) + coeffs.e_minus(px, py) * eval_f_gamma(beta, -t2)
    return g_a + s_over_r * g_b


def projector_p(theta1, theta2):
    """Symbol of the bilinear prolongation, ``(1 + cos t1)(1 + cos t2)``."""
    return (1 + np.cos(theta1)) * (1 + np.cos(theta2))


def _one_plus_cos_pi_minus(t):
    # 1 + cos(pi - t) = 1 - cos t, computed without cancellation
    return 2 * np.sin(np.asarray(t) / 2) ** 2


def mirror_points(theta):
    t1, t2 = theta
    return [(t1, np.pi - t2), (np.pi - t1, t2), (np.pi - t1, np.pi - t2)]


def _p_at_mirrors(t1, t2):
    """``p`` at the three mirror points of ``(t1, t2)``, evaluated stably."""
    c1, c2 = 1 + np.cos(t1), 1 + np.cos(t2)
    s1, s2 = _one_plus_cos_pi_minus(t1), _one_plus_cos_pi_minus(t2)
    return np.stack([c1 * s2, s1 * c2, s1 * s2])


def polar_angle(theta):
    """Argument of ``1 - exp(i theta)``; ``-pi/2`` at ``theta == 0``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.arctan2(-np.sin(theta), 1 - np.cos(theta))
    return np.where(theta == 0, -np.pi / 2, phi)


@dataclass
class LimitCheckReport:
    ray_angles: np.ndarray
    radii: np.ndarray
    ratio_values: np.ndarray  # shape (n_rays, n_radii)
    sup_estimate: float
    inf_estimate: float
    verdict: bool
    target: complex | None = None
    extra: dict = field(default_factory=dict)


def _default_rays(count: int = 16) -> np.ndarray:
    # offset so that no ray lies exactly on an axis
    return (np.arange(count) + 0.5) * 2 * np.pi / count


def check_projector_condition(
    alpha, beta, d, e, s_over_r, mode: str = "tgm", n_rays: int = 16, n_radii: int = 60,
    min_radius: float | None = None, threshold: float = 1e-3,
) -> LimitCheckReport:
    """Sample ``p(y)^k / F(x)`` (``k = 2`` for tgm, ``1`` for vcycle) as ``x -> 0``.

    The largest ratio over the three mirror points is taken at each sample.
    The ratio decays like ``|x|^(2k - max(alpha, beta))`` in the worst
    direction, so by default the radii go down far enough for that power law
    to reach ``threshold / 1000`` (never less deep than ``1e-6``).
    """
    if mode not in ("tgm", "vcycle"):
        raise ValueError("mode must be 'tgm' or 'vcycle'")
    power = 2 if mode == "tgm" else 1
    if min_radius is None:
        expo = 2 * power - max(alpha, beta)
        min_radius = min(1e-6, max(1e-150, (threshold * 1e-3) ** (1 / expo)))
    radii = np.geomspace(0.5, min_radius, n_radii)
    rays = _default_rays(n_rays)
    t1 = np.outer(np.cos(rays), radii)
    t2 = np.outer(np.sin(rays), radii)
    F = eval_F(alpha, beta, d, e, s_over_r, t1, t2)
    ratios = (_p_at_mirrors(t1, t2) ** power / F).max(axis=0)
    finite = np.all(np.isfinite(ratios)) and np.all(F > 0)
    monotone = bool(np.all(np.diff(ratios, axis=1) <= 1e-12 * ratios[:, :-1]))
    final = ratios[:, -1]
    verdict = bool(finite and monotone and np.all(final < threshold))
    return LimitCheckReport(
        ray_angles=rays, radii=radii, ratio_values=ratios,
        sup_estimate=float(final.max()), inf_estimate=float(final.min()), verdict=verdict,
        extra={"mode": mode, "monotone": monotone, "min_radius": min_radius},
    )


def check_F_zero_order(alpha, beta, d, e, s_over_r, n_rays: int = 16, n_radii: int = 40) -> LimitCheckReport:
    """Sample ``F(theta) / |theta|^gamma`` with ``gamma = min(alpha, beta)``.

    Verdict: all samples lie in ``(0, bound * 1.01]`` where ``bound`` is
    ``-2 d cos(alpha pi / 2)`` (``gamma = alpha``) or
    ``-2 e (s/r) cos(beta pi / 2)`` (``gamma = beta``), up to the lower-order
    term, which is checked at radii below ``1e-2``.
    """
    gamma = min(alpha, beta)
    radii = np.geomspace(1e-2, 1e-8, n_radii)
    rays = _default_rays(n_rays)
    t1 = np.outer(np.cos(rays), radii)
    t2 = np.outer(np.sin(rays), radii)
    ratios = eval_F(alpha, beta, d, e, s_over_r, t1, t2) / radii**gamma
    if alpha < beta:
        bound = -2 * d * np.cos(alpha * np.pi / 2)
    elif beta < alpha:
        bound = -2 * e * s_over_r * np.cos(beta * np.pi / 2)
    else:
        bound = -2 * (d + e * s_over_r) * np.cos(alpha * np.pi / 2)
    verdict = bool(np.all(ratios > 0) and ratios.max() <= bound * 1.01)
    return LimitCheckReport(
        ray_angles=rays, radii=radii, ratio_values=ratios,
        sup_estimate=float(ratios.max()), inf_estimate=float(ratios.min()),
        verdict=verdict, target=complex(bound),
    )


def h_over_F_target(alpha, beta, coeffs: CoeffSet, d, e, x) -> complex:
    """Limit of ``h / F`` as ``theta -> 0`` through the positive side."""
    px, py = x
    if alpha < beta:
        cp, cm, c, g = coeffs.d_plus(px, py), coeffs.d_minus(px, py), d, alpha
    else:
        cp, cm, c, g = coeffs.e_plus(px, py), coeffs.e_minus(px, py), e, beta
    return (cp + cm) / (2 * c) - 1j * np.tan(g * np.pi / 2) * (cp - cm) / (2 * c)


def check_limsup_ratio_h_over_F(
    alpha, beta, coeffs: CoeffSet, d, e, s_over_r, x, n_radii: int = 40, rtol: float = 0.01,
) -> LimitCheckReport:
    """Estimate ``limsup h/F`` along the axis of the lower order, approached from ``0+``.

    The ``0-`` branch (the complex conjugate direction) is recorded in
    ``extra['minus_branch']`` without a verdict.
    """
    if alpha == beta:
        raise ValueError("the h/F limit needs alpha != beta")
    radii = np.geomspace(1e-1, 1e-7, n_radii)
    zeros = np.zeros_like(radii)

    def along(sign):
        if alpha < beta:
            return eval_h(alpha, beta, coeffs, s_over_r, x, sign * radii, zeros) / eval_F(
                alpha, beta, d, e, s_over_r, sign * radii, zeros)
        return eval_h(alpha, beta, coeffs, s_over_r, x, zeros, sign * radii) / eval_F(
            alpha, beta, d, e, s_over_r, zeros, sign * radii)

    plus, minus = along(1.0), along(-1.0)
    target = h_over_F_target(alpha, beta, coeffs, d, e, x)
    est = plus[-1]
    verdict = bool(abs(est - target) <= rtol * abs(target))
    axis_ray = 0.0 if alpha < beta else np.pi / 2
    return LimitCheckReport(
        ray_angles=np.array([axis_ray]), radii=radii, ratio_values=plus[None, :],
        sup_estimate=float(est.real), inf_estimate=float(est.real), verdict=verdict,
        target=complex(target), extra={"estimate": complex(est), "minus_branch": complex(minus[-1])},
    )


def bttb_symbol_eigs(alpha, beta, d, e, s_over_r, n: int) -> np.ndarray:
    """Sorted eigenvalues of the symmetric BTTB matrix ``T_N(F)``, ``N = n^2``."""
    from .structured_ops import ToeplitzBlock

    ta = ToeplitzBlock.from_order(alpha, n).dense()
    tb = ToeplitzBlock.from_order(beta, n).dense()
    eye = np.eye(n)
    T = d * np.kron(eye, ta + ta.T) + e * s_over_r * np.kron(tb + tb.T, eye)
    return np.linalg.eigvalsh(T)


def symbol_grid_samples(alpha, beta, d, e, s_over_r, n: int) -> np.ndarray:
    """``F`` sampled on the midpoints of a uniform ``n x n`` partition of ``[-pi, pi]^2``."""
    t = -np.pi + (2 * np.arange(n) + 1) * np.pi / n
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    return np.sort(eval_F(alpha, beta, d, e, s_over_r, T1, T2).ravel())


def ecdf_distance(a, b) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDFs of two samples."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / len(a)
    fb = np.searchsorted(b, pts, side="right") / len(b)
    return float(np.abs(fa - fb).max())


def distribution_distances(alpha, beta, d=1.0, e=1.0, s_over_r=1.0, sizes=(8, 16, 32)) -> list[float]:
    return [
        ecdf_distance(bttb_symbol_eigs(alpha, beta, d, e, s_over_r, n),
                      symbol_grid_samples(alpha, beta, d, e, s_over_r, n))
        for n in sizes
    ]


def q_zero_order_bracket(gamma: float, xis=None) -> tuple[float, float]:
    """Range of ``q_gamma(xi) / |xi|^gamma`` over small ``xi``."""
    if xis is None:
        xis = 10.0 ** -np.arange(1, 7)
    ratios = eval_q_gamma(check_order(gamma), xis) / np.abs(xis) ** gamma
    return float(ratios.min()), float(ratios.max())
