"""FDE problem definitions, grids and per-time-step operator assembly."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import gamma as Gamma, rgamma

from .fracweights import check_order
from .structured_ops import StructuredFdeOperator, ToeplitzBlock

Field = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def rl_derivative_poly(poly: Polynomial, gamma: float, z: np.ndarray) -> np.ndarray:
    """Riemann-Liouville derivative of ``sum c_k z^k`` with base point ``z = 0``.

    Each monomial maps to ``Gamma(k+1) / Gamma(k+1-gamma) z^(k-gamma)``.
    Evaluate only at ``z > 0``.
    """
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for k, c in enumerate(poly.coef):
        if c == 0.0:
            continue
        out += c * Gamma(k + 1) * rgamma(k + 1 - gamma) * z ** (k - gamma)
    return out


@dataclass(frozen=True)
class SeparableSolution:
    """``u = amplitude * exp(-t) * X(x) * Y(y)`` with polynomial ``X``, ``Y``."""

    amplitude: float
    X: Polynomial
    Y: Polynomial

    def __call__(self, x, y, t):
        return self.amplitude * np.exp(-t) * self.X(x) * self.Y(y)

    def dt(self, x, y, t):
        return -self(x, y, t)

    def frac_x(self, gamma, a, b, x):
        """Left and right RL derivatives of ``X`` on ``[a, b]``."""
        left = rl_derivative_poly(self.X(Polynomial([a, 1.0])), gamma, x - a)
        right = rl_derivative_poly(self.X(Polynomial([b, -1.0])), gamma, b - x)
        return left, right

    def frac_y(self, gamma, a, b, y):
        left = rl_derivative_poly(self.Y(Polynomial([a, 1.0])), gamma, y - a)
        right = rl_derivative_poly(self.Y(Polynomial([b, -1.0])), gamma, b - y)
        return left, right


@dataclass(frozen=True)
class FdeProblem:
    name: str
    domain: tuple[float, float, float, float]  # a1, b1, a2, b2
    T: float
    alpha: float
    beta: float
    d_plus: Field
    d_minus: Field
    e_plus: Field
    e_minus: Field
    exact: SeparableSolution | None = None
    source: Field | None = None
    u0: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    time_dependent: bool = True

    def __post_init__(self):
        a1, b1, a2, b2 = self.domain
        if not (b1 > a1 and b2 > a2 and self.T > 0):
            raise ValueError("need b1 > a1, b2 > a2 and T > 0")
        check_order(self.alpha)
        check_order(self.beta)

    def initial(self, x, y):
        if self.u0 is not None:
            return self.u0(x, y)
        if self.exact is not None:
            return self.exact(x, y, 0.0)
        return np.zeros(np.broadcast(x, y).shape)

    def rhs_source(self, x, y, t):
        if self.source is not None:
            return self.source(x, y, t)
        if self.exact is None:
            return np.zeros(np.broadcast(x, y).shape)
        return manufactured_source(self, x, y, t)

    def with_orders(self, alpha: float, beta: float, name: str | None = None) -> "FdeProblem":
        return replace(self, alpha=alpha, beta=beta, name=name or f"{self.name}[{alpha},{beta}]")


def manufactured_source(p: FdeProblem, x, y, t):
    """``v = u_t - (d+ D+x + d- D-x + e+ D+y + e- D-y) u`` for the exact solution."""
    u = p.exact
    a1, b1, a2, b2 = p.domain
    lx, rx = u.frac_x(p.alpha, a1, b1, x)
    ly, ry = u.frac_y(p.beta, a2, b2, y)
    amp = u.amplitude * np.exp(-t)
    X, Y = u.X(x), u.Y(y)
    frac = amp * (
        p.d_plus(x, y, t) * lx * Y + p.d_minus(x, y, t) * rx * Y
        + p.e_plus(x, y, t) * X * ly + p.e_minus(x, y, t) * X * ry
    )
    return u.dt(x, y, t) - frac


@dataclass(frozen=True)
class Grid:
    """Interior nodes and step sizes for one level; ``dt`` is shared by all levels."""

    n1: int
    n2: int
    M: int
    hx: float
    hy: float
    dt: float
    alpha: float
    beta: float
    xs: np.ndarray
    ys: np.ndarray

    @classmethod
    def for_problem(cls, p: FdeProblem, n1: int, n2: int | None = None, M: int | None = None) -> "Grid":
        n2 = n1 if n2 is None else n2
        M = n1 if M is None else M
        a1, b1, a2, b2 = p.domain
        hx = (b1 - a1) / (n1 + 1)
        hy = (b2 - a2) / (n2 + 1)
        xs = a1 + hx * np.arange(1, n1 + 1)
        ys = a2 + hy * np.arange(1, n2 + 1)
        return cls(n1, n2, M, hx, hy, p.T / M, p.alpha, p.beta, xs, ys)

    @property
    def N(self) -> int:
        return self.n1 * self.n2

    @property
    def r(self) -> float:
        return self.dt / (2 * self.hx**self.alpha)

    @property
    def s(self) -> float:
        return self.dt / (2 * self.hy**self.beta)

    @property
    def inv_r(self) -> float:
        return 2 * self.hx**self.alpha / self.dt

    @property
    def s_over_r(self) -> float:
        return self.hx**self.alpha / self.hy**self.beta

    def t(self, m: float) -> float:
        return m * self.dt

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates flattened x-fastest."""
        X, Y = np.meshgrid(self.xs, self.ys, indexing="xy")
        return X.ravel(), Y.ravel()

    def coarsen(self) -> "Grid":
        """Coarse grid on the sub-lattice picked by the down-sampling matrix.

        Coarse node ``j`` (1-based) sits on fine node ``2j - (n+1) mod 2``; the
        spacing doubles and ``dt`` is unchanged.
        """
        k1, k2 = coarse_size(self.n1), coarse_size(self.n2)
        ix = 2 * np.arange(1, k1 + 1) - (self.n1 + 1) % 2 - 1
        iy = 2 * np.arange(1, k2 + 1) - (self.n2 + 1) % 2 - 1
        return replace(self, n1=k1, n2=k2, hx=2 * self.hx, hy=2 * self.hy, xs=self.xs[ix], ys=self.ys[iy])


def coarse_size(n: int) -> int:
    return (n - n % 2) // 2


def assemble_operator(p: FdeProblem, g: Grid, t: float) -> StructuredFdeOperator:
    """``M`` on grid ``g`` with coefficients frozen at time ``t``."""
    X, Y = g.mesh()
    diag = []
    for name in ("d_plus", "d_minus", "e_plus", "e_minus"):
        v = np.broadcast_to(np.asarray(getattr(p, name)(X, Y, t), dtype=float), X.shape).copy()
        if np.any(v < 0):
            raise ValueError(f"coefficient {name} is negative on the grid at t={t}")
        diag.append(v)
    return StructuredFdeOperator(
        g.n1, g.n2, g.inv_r, g.s_over_r,
        ToeplitzBlock.from_order(p.alpha, g.n1), ToeplitzBlock.from_order(p.beta, g.n2), *diag,
    )


def assemble_step_operator(p: FdeProblem, g: Grid, m: int) -> StructuredFdeOperator:
    if not (0 <= m <= g.M):
        raise ValueError(f"time index {m} outside 0..{g.M}")
    return assemble_operator(p, g, g.t(m))


# -- built-in problems -------------------------------------------------------

def example1() -> FdeProblem:
    al, be = 1.8, 1.6
    ga, gb = Gamma(3 - al), Gamma(3 - be)
    bump = Polynomial([0, 0, 4, -4, 1])  # x^2 (2 - x)^2
    return FdeProblem(
        name="example1", domain=(0.0, 2.0, 0.0, 2.0), T=1.0, alpha=al, beta=be,
        d_plus=lambda x, y, t: ga * (1 + x) ** al * (1 + y) ** 2,
        d_minus=lambda x, y, t: ga * (3 - x) ** al * (3 - y) ** 2,
        e_plus=lambda x, y, t: gb * (1 + x) ** 2 * (1 + y) ** be,
        e_minus=lambda x, y, t: gb * (3 - x) ** 2 * (3 - y) ** be,
        exact=SeparableSolution(16.0, bump, bump),
        time_dependent=False,
    )


_CUBIC_BUMP = Polynomial([0, 0, 0, 1, -3, 3, -1])  # x^3 (1 - x)^3


def example2(alpha: float = 1.8, beta: float = 1.9) -> FdeProblem:
    return FdeProblem(
        name="example2", domain=(0.0, 1.0, 0.0, 1.0), T=1.0, alpha=alpha, beta=beta,
        d_plus=lambda x, y, t: 4 * (1 + t) * x**alpha * (1 + y),
        d_minus=lambda x, y, t: 4 * (1 + t) * (1 - x) ** alpha * (1 + y),
        e_plus=lambda x, y, t: 4 * (1 + t) * (1 + x) * y**beta,
        e_minus=lambda x, y, t: 4 * (1 + t) * (1 + x) * (1 - y) ** beta,
        exact=SeparableSolution(1.0, _CUBIC_BUMP, _CUBIC_BUMP),
        time_dependent=True,
    )


def example3(alpha: float = 1.8, beta: float = 1.9) -> FdeProblem:
    return FdeProblem(
        name="example3", domain=(0.0, 1.0, 0.0, 1.0), T=1.0, alpha=alpha, beta=beta,
        d_plus=lambda x, y, t: 6 * x**alpha,
        d_minus=lambda x, y, t: 6 * (1 - x) ** alpha,
        e_plus=lambda x, y, t: 6 * y**beta,
        e_minus=lambda x, y, t: 6 * (1 - y) ** beta,
        exact=SeparableSolution(1.0, _CUBIC_BUMP, _CUBIC_BUMP),
        time_dependent=False,
    )


def constant_problem(alpha, beta, domain=(0.0, 1.0, 0.0, 1.0), d=1.0, e=1.0, T=1.0) -> FdeProblem:
    """Constant equal coefficients with the cubic-bump manufactured solution."""
    a1, b1, a2, b2 = domain
    X = Polynomial([-a1, 1]) ** 3 * Polynomial([b1, -1]) ** 3
    Y = Polynomial([-a2, 1]) ** 3 * Polynomial([b2, -1]) ** 3
    const = lambda c: (lambda x, y, t: np.full(np.broadcast(x, y).shape, c))
    return FdeProblem(
        name="constant", domain=domain, T=T, alpha=alpha, beta=beta,
        d_plus=const(d), d_minus=const(d), e_plus=const(e), e_minus=const(e),
        exact=SeparableSolution(1.0, X, Y), time_dependent=False,
    )


def builtin_examples() -> dict[int, FdeProblem]:
    return {1: example1(), 2: example2(), 3: example3()}


def get_example(k: int) -> FdeProblem:
    try:
        return builtin_examples()[int(k)]
    except KeyError:
        raise ValueError(f"unknown example {k!r}; choose 1, 2 or 3") from None
