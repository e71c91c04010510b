"""Matrix-free real operators: identity, ones, dense blocks, Kronecker
products, direct sums, diagonals and compositions.

``apply`` works on float arrays and on ``object`` arrays alike (it only uses
``+`` and scalar ``*`` on the entries), which is what lets the dataflow tracer
run the very same operator code symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Literal

import numpy as np
import scipy.linalg

from .core import ShapeError

MATERIALIZE_CAP = 10**6


class MaterializeError(RuntimeError):
    """Refusal to densify an operator above the entry cap."""


class StructuredOperator:
    out_dim: int
    in_dim: int

    @property
    def shape(self) -> tuple[int, int]:
        return (self.out_dim, self.in_dim)

    def _apply(self, V: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _dense(self) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(StructuredOperator):
    n: int

    def __post_init__(self):
        _positive(self.n)

    out_dim = property(lambda self: self.n)
    in_dim = property(lambda self: self.n)

    def _apply(self, V):
        return V

    def _dense(self):
        return np.eye(self.n)


@dataclass(frozen=True)
class Ones(StructuredOperator):
    rows: int
    cols: int

    def __post_init__(self):
        _positive(self.rows, self.cols)

    out_dim = property(lambda self: self.rows)
    in_dim = property(lambda self: self.cols)

    def _apply(self, V):
        s = V[0:1] if self.cols == 1 else V.sum(axis=0, keepdims=True)
        return np.repeat(s, self.rows, axis=0)

    def _dense(self):
        return np.ones((self.rows, self.cols))


@dataclass(frozen=True, eq=False)
class Dense(StructuredOperator):
    """Small explicit real block."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64, copy=True)
        if arr.ndim != 2 or 0 in arr.shape:
            raise ShapeError(f"dense block must be a non-empty 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    out_dim = property(lambda self: self.entries.shape[0])
    in_dim = property(lambda self: self.entries.shape[1])

    def _apply(self, V):
        if V.dtype != object:
            return self.entries @ V
        # symbolic entries: structural zeros contribute no term at all
        out = np.zeros((self.out_dim, V.shape[1]), dtype=object)
        for i, row in enumerate(self.entries):
            for coef, vj in zip(row, V):
                if coef:
                    out[i] = out[i] + coef * vj
        return out

    def _dense(self):
        return np.array(self.entries)

    def __eq__(self, other):
        return isinstance(other, Dense) and np.array_equal(self.entries, other.entries)

    __hash__ = None


@dataclass(frozen=True)
class Kron(StructuredOperator):
    left: StructuredOperator
    right: StructuredOperator

    out_dim = property(lambda self: self.left.out_dim * self.right.out_dim)
    in_dim = property(lambda self: self.left.in_dim * self.right.in_dim)

    def _apply(self, V):
        # (L (x) R) vec(X) with X of shape (q, s): rows of X are right-blocks.
        q, s = self.left.in_dim, self.right.in_dim
        p, r = self.left.out_dim, self.right.out_dim
        b = V.shape[1]
        Z = V.reshape(q, s, b).transpose(1, 0, 2).reshape(s, q * b)
        Z = self.right._apply(Z)
        Z = Z.reshape(r, q, b).transpose(1, 0, 2).reshape(q, r * b)
        Z = self.left._apply(Z)
        return Z.reshape(p * r, b)

    def _dense(self):
        return np.kron(self.left._dense(), self.right._dense())


@dataclass(frozen=True)
class DirectSum(StructuredOperator):
    blocks: tuple[StructuredOperator, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ShapeError("direct sum needs at least one block")

    out_dim = property(lambda self: sum(b.out_dim for b in self.blocks))
    in_dim = property(lambda self: sum(b.in_dim for b in self.blocks))

    def _apply(self, V):
        parts = []
        start = 0
        for blk in self.blocks:
            parts.append(blk._apply(V[start:start + blk.in_dim]))
            start += blk.in_dim
        return np.concatenate(parts, axis=0)

    def _dense(self):
        return scipy.linalg.block_diag(*(b._dense() for b in self.blocks))


@dataclass(frozen=True, eq=False)
class Diagonal(StructuredOperator):
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, copy=True)
        if arr.ndim != 1 or arr.shape[0] == 0:
            raise ShapeError(f"diagonal needs a non-empty 1-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    out_dim = property(lambda self: self.values.shape[0])
    in_dim = property(lambda self: self.values.shape[0])

    def _apply(self, V):
        return self.values[:, None] * V

    def _dense(self):
        return np.diag(self.values.astype(np.float64))

    __hash__ = None


@dataclass(frozen=True)
class Compose(StructuredOperator):
    """Product ``factors[0] @ factors[1] @ ...``; the last factor acts first."""

    factors: tuple[StructuredOperator, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ShapeError("composition needs at least one factor")
        for outer, inner in zip(self.factors, self.factors[1:]):
            if outer.in_dim != inner.out_dim:
                raise ShapeError(
                    f"cannot compose {outer.out_dim}x{outer.in_dim} after "
                    f"{inner.out_dim}x{inner.in_dim}"
                )

    out_dim = property(lambda self: self.factors[0].out_dim)
    in_dim = property(lambda self: self.factors[-1].in_dim)

    def _apply(self, V):
        for f in reversed(self.factors):
            V = f._apply(V)
        return V

    def _dense(self):
        return reduce(np.matmul, (f._dense() for f in self.factors))


def _positive(*dims: int) -> None:
    for d in dims:
        if int(d) != d or d < 1:
            raise ShapeError(f"dimension must be a positive integer, got {d!r}")


def apply(op: StructuredOperator, v: np.ndarray) -> np.ndarray:
    """``op @ v`` without densifying. ``v`` may be 1-D or (in_dim, batch)."""
    v = np.asarray(v)
    if v.shape[:1] != (op.in_dim,) or v.ndim > 2:
        raise ShapeError(f"operator is {op.out_dim}x{op.in_dim}, input has shape {v.shape}")
    if v.ndim == 1:
        return op._apply(v[:, None])[:, 0]
    return op._apply(v)


def materialize(op: StructuredOperator, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """Dense matrix of ``op``, built independently of :func:`apply`."""
    if op.out_dim * op.in_dim > cap:
        raise MaterializeError(
            f"refusing to materialize {op.out_dim}x{op.in_dim} operator (cap {cap} entries)"
        )
    return op._dense()


# Gauss-trick blocks: H @ ((GA @ (a, b)) * (GB @ (c, d))) == (ac - bd, ad + bc).
GA = Dense(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]]))
GB = Dense(np.array([[1.0, -1.0], [1.0, 1.0], [0.0, 1.0]]))
H = Dense(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]))


def _require_even(N: int) -> None:
    if N % 2:
        raise ShapeError(f"N must be even, got {N}; pad the problem first")


def build_P(M: int, N: int) -> StructuredOperator:
    """``I_{N/2} (x) (1_{Mx1} (x) I_2)``: repeat each complex pair M times."""
    _require_even(N)
    _positive(M, N)
    return Kron(Identity(N // 2), Kron(Ones(M, 1), Identity(2)))


def build_broadcast(M: int) -> StructuredOperator:
    """``1_{Mx1} (x) I_2``: one complex pair copied to M slots."""
    return Kron(Ones(M, 1), Identity(2))


def build_gauss_lift(pairs: int, side: Literal["left", "right"]) -> StructuredOperator:
    """``I_pairs (x) GA`` (left) or ``I_pairs (x) GB`` (right)."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return Kron(Identity(pairs), GA if side == "left" else GB)


def build_sum_combine(M: int, N: int) -> tuple[StructuredOperator, StructuredOperator]:
    """Block-sum ``1_{1xN/2} (x) I_{3M}`` and triple-combine ``I_M (x) H``."""
    _require_even(N)
    _positive(M, N)
    return Kron(Ones(1, N // 2), Identity(3 * M)), Kron(Identity(M), H)
