"""Diagonal-times-Toeplitz representation of the CN-WSGD coefficient matrix.

Vectors of length ``N = n1 * n2`` are ordered x-fastest, so a vector reshaped
to ``(n2, n1)`` has x-lines along its rows.  ``I (x) A_alpha`` therefore acts
along axis 1 and ``A_beta (x) I`` along axis 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fracweights import wsgd_weights

DENSE_CAP = 4096


def _embed_size(n: int) -> int:
    m = max(1, 2 * n - 1)
    return 1 << (m - 1).bit_length()


@dataclass(frozen=True)
class ToeplitzBlock:
    """Toeplitz matrix given by its first column and first row."""

    first_col: np.ndarray
    first_row: np.ndarray
    _spec: np.ndarray = field(init=False, repr=False, compare=False)
    _spec_t: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        col = np.asarray(self.first_col, dtype=float)
        row = np.asarray(self.first_row, dtype=float)
        if col.shape != row.shape or col.ndim != 1:
            raise ValueError("first_col and first_row must be 1-D of equal length")
        if col[0] != row[0]:
            raise ValueError("first_col[0] must equal first_row[0]")
        object.__setattr__(self, "first_col", col)
        object.__setattr__(self, "first_row", row)
        L = _embed_size(len(col))
        object.__setattr__(self, "_spec", np.fft.rfft(self._circulant(col, row, L)))
        object.__setattr__(self, "_spec_t", np.fft.rfft(self._circulant(row, col, L)))

    @staticmethod
    def _circulant(col, row, L):
        n = len(col)
        c = np.zeros(L)
        c[:n] = col
        if n > 1:
            c[L - n + 1:] = row[:0:-1]
        return c

    @classmethod
    def from_order(cls, gamma: float, n: int) -> "ToeplitzBlock":
        """The block ``-[w_{i-j+1}]`` of order ``n`` built from WSGD weights."""
        w = wsgd_weights(gamma, max(n, 2)).w
        col = -w[1:n + 1]
        row = np.zeros(n)
        row[0] = -w[1]
        if n > 1:
            row[1] = -w[0]
        return cls(col, row)

    @property
    def n(self) -> int:
        return len(self.first_col)

    @property
    def L(self) -> int:
        return 2 * (len(self._spec) - 1)

    def matvec(self, x, transpose: bool = False, axis: int = -1) -> np.ndarray:
        """``T x`` (or ``T^T x``) along ``axis`` via circulant embedding."""
        x = np.asarray(x, dtype=float)
        if x.shape[axis] != self.n:
            raise ValueError(f"dimension mismatch: expected {self.n}, got {x.shape[axis]}")
        spec = self._spec_t if transpose else self._spec
        shape = [1] * x.ndim
        shape[axis] = len(spec)
        y = np.fft.irfft(np.fft.rfft(x, n=self.L, axis=axis) * spec.reshape(shape), n=self.L, axis=axis)
        return np.take(y, np.arange(self.n), axis=axis)

    def dense(self) -> np.ndarray:
        n = self.n
        i, j = np.indices((n, n))
        d = i - j
        return np.where(d >= 0, self.first_col[np.abs(d)], self.first_row[np.abs(d)])

    def sparse(self) -> sp.csr_array:
        """Sparse form; for these blocks the strict upper part has one diagonal."""
        n = self.n
        offsets = [-k for k in range(n) if self.first_col[k] != 0]
        offsets += [k for k in range(1, n) if self.first_row[k] != 0]
        data = [np.full(n - abs(k), self.first_col[-k] if k <= 0 else self.first_row[k]) for k in offsets]
        return sp.diags_array(data, offsets=offsets, shape=(n, n), format="csr")


def toeplitz_matvec(block: ToeplitzBlock, x, transpose: bool = False) -> np.ndarray:
    return block.matvec(x, transpose=transpose)


@dataclass(frozen=True)
class StructuredFdeOperator:
    """``(1/r) I + A_x + (s/r) A_y`` kept as diagonals and two Toeplitz blocks."""

    n1: int
    n2: int
    inv_r: float
    s_over_r: float
    A_alpha: ToeplitzBlock
    A_beta: ToeplitzBlock
    Dp: np.ndarray
    Dm: np.ndarray
    Ep: np.ndarray
    Em: np.ndarray

    def __post_init__(self):
        N = self.n1 * self.n2
        if self.A_alpha.n != self.n1 or self.A_beta.n != self.n2:
            raise ValueError("Toeplitz block orders must match n1, n2")
        for name in ("Dp", "Dm", "Ep", "Em"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (N,):
                raise ValueError(f"{name} must have length {N}")
            if np.any(v < 0):
                raise ValueError(f"{name} has negative entries")
            object.__setattr__(self, name, v)
        if self.inv_r < 0 or self.s_over_r <= 0:
            raise ValueError("need inv_r >= 0 and s_over_r > 0")

    @property
    def N(self) -> int:
        return self.n1 * self.n2

    @classmethod
    def from_constants(cls, alpha, beta, n1, n2, inv_r, s_over_r, dp, dm, ep, em):
        N = n1 * n2
        return cls(
            n1, n2, inv_r, s_over_r,
            ToeplitzBlock.from_order(alpha, n1), ToeplitzBlock.from_order(beta, n2),
            np.full(N, float(dp)), np.full(N, float(dm)), np.full(N, float(ep)), np.full(N, float(em)),
        )

    def _fractional_part(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.N,):
            raise ValueError(f"dimension mismatch: expected {self.N}, got {u.shape}")
        U = u.reshape(self.n2, self.n1)
        ax = self.Dp * self.A_alpha.matvec(U, axis=1).ravel()
        ax += self.Dm * self.A_alpha.matvec(U, transpose=True, axis=1).ravel()
        ay = self.Ep * self.A_beta.matvec(U, axis=0).ravel()
        ay += self.Em * self.A_beta.matvec(U, transpose=True, axis=0).ravel()
        return ax + self.s_over_r * ay

    def apply_M(self, u) -> np.ndarray:
        return self.inv_r * np.asarray(u, dtype=float) + self._fractional_part(u)

    __call__ = apply_M

    def apply_rhs_operator(self, u) -> np.ndarray:
        return self.inv_r * np.asarray(u, dtype=float) - self._fractional_part(u)

    def diagonal(self) -> np.ndarray:
        a0 = self.A_alpha.first_col[0]
        b0 = self.A_beta.first_col[0]
        return self.inv_r + (self.Dp + self.Dm) * a0 + self.s_over_r * (self.Ep + self.Em) * b0

    def to_sparse(self) -> sp.csr_array:
        """Explicit sparse matrix; every x-line and y-line is a full lower-Hessenberg block."""
        Ta = self.A_alpha.sparse()
        Tb = self.A_beta.sparse()
        I1 = sp.identity(self.n1, format="csr")
        I2 = sp.identity(self.n2, format="csr")
        dg = sp.diags_array
        M = (
            dg(self.Dp) @ sp.kron(I2, Ta) + dg(self.Dm) @ sp.kron(I2, Ta.T)
            + self.s_over_r * (dg(self.Ep) @ sp.kron(Tb, I1) + dg(self.Em) @ sp.kron(Tb.T, I1))
        )
        return sp.csr_array(M + self.inv_r * sp.identity(self.N))


def apply_M(op: StructuredFdeOperator, u) -> np.ndarray:
    return op.apply_M(u)


def apply_rhs_operator(op: StructuredFdeOperator, u) -> np.ndarray:
    return op.apply_rhs_operator(u)


def dense_assemble(op: StructuredFdeOperator) -> np.ndarray:
    """Dense ``N x N`` matrix via explicit Kronecker products (test oracle)."""
    if op.N > DENSE_CAP:
        raise ValueError(f"refusing to densify N={op.N} > {DENSE_CAP}")
    Ta = op.A_alpha.dense()
    Tb = op.A_beta.dense()
    I1, I2 = np.eye(op.n1), np.eye(op.n2)
    Ax = op.Dp[:, None] * np.kron(I2, Ta) + op.Dm[:, None] * np.kron(I2, Ta.T)
    Ay = op.Ep[:, None] * np.kron(Tb, I1) + op.Em[:, None] * np.kron(Tb.T, I1)
    return op.inv_r * np.eye(op.N) + Ax + op.s_over_r * Ay
