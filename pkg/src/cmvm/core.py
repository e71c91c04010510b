"""Complex scalar/vector/matrix primitives and the scalar reference formulas.

Complex scalars are plain Python ``complex``. Matrices and vectors are thin
immutable wrappers over ``complex128`` arrays that validate shape and
finiteness once, at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ShapeError(ValueError):
    """Operand dimensions do not conform."""


class NonFiniteError(ValueError):
    """NaN or Inf supplied where a finite value is required."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} contains non-finite entries")


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Constant M x N complex matrix, stored row-major."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2:
            raise ShapeError(f"matrix must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"matrix must be non-empty, got {arr.shape[0]}x{arr.shape[1]}")
        arr = _frozen(arr)
        _check_finite(arr, "matrix")
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def coerce(cls, a) -> "ComplexMatrix":
        return a if isinstance(a, cls) else cls(np.asarray(a, dtype=np.complex128))

    @classmethod
    def from_pairs(cls, rows: int, cols: int, pairs: Sequence[Sequence[float]]) -> "ComplexMatrix":
        """Build from ``rows*cols`` ``[re, im]`` pairs in row-major order."""
        flat = np.asarray(pairs, dtype=np.float64)
        if flat.shape != (rows * cols, 2):
            raise ShapeError(
                f"expected {rows * cols} [re, im] pairs for a {rows}x{cols} matrix, "
                f"got array of shape {flat.shape}"
            )
        return cls((flat[:, 0] + 1j * flat[:, 1]).reshape(rows, cols))

    def __eq__(self, other):
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ComplexVector:
    """Complex vector of length ``len``."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 1:
            raise ShapeError(f"vector must be 1-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1:
            raise ShapeError("vector must be non-empty")
        arr = _frozen(arr)
        _check_finite(arr, "vector")
        object.__setattr__(self, "entries", arr)

    def __len__(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def coerce(cls, x) -> "ComplexVector":
        return x if isinstance(x, cls) else cls(np.atleast_1d(np.asarray(x, dtype=np.complex128)))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "ComplexVector":
        flat = np.asarray(pairs, dtype=np.float64)
        if flat.ndim != 2 or flat.shape[1] != 2:
            raise ShapeError(f"expected a list of [re, im] pairs, got array of shape {flat.shape}")
        return cls(flat[:, 0] + 1j * flat[:, 1])

    def __eq__(self, other):
        if not isinstance(other, ComplexVector):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None


def interleave(v) -> np.ndarray:
    """Complex length-K vector -> real length-2K ``[re0, im0, re1, im1, ...]``."""
    z = np.asarray(v.entries if isinstance(v, ComplexVector) else v, dtype=np.complex128)
    out = np.empty(2 * z.shape[0], dtype=np.float64)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def deinterleave(data) -> np.ndarray:
    """Inverse of :func:`interleave`."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 1 or data.shape[0] % 2:
        raise ShapeError(f"interleaved data must have even length, got {data.shape}")
    return data[0::2] + 1j * data[1::2]


def _scalar(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFiniteError(f"non-finite complex scalar {z!r}")
    return z


def direct_complex_mult(u, v) -> complex:
    """Schoolbook product: four real multiplications, two additions."""
    u, v = _scalar(u), _scalar(v)
    a, b, c, d = u.real, u.imag, v.real, v.imag
    return complex(a * c - b * d, a * d + b * c)


def gauss_complex_mult(u, v) -> complex:
    """Three-multiplication product ``ac - bd + j[(a+b)(c+d) - ac - bd]``."""
    u, v = _scalar(u), _scalar(v)
    a, b, c, d = u.real, u.imag, v.real, v.imag
    ac = a * c
    bd = b * d
    cross = (a + b) * (c + d)
    return complex(ac - bd, cross - ac - bd)


def gauss_pipeline_mult(u, v) -> complex:
    """The three-product split used by the compiled pipeline.

    ``p0 = a(c-d)``, ``p1 = b(c+d)``, ``p2 = (a-b)d``; real part ``p0 + p2``,
    imaginary part ``p1 + p2``.
    """
    u, v = _scalar(u), _scalar(v)
    a, b, c, d = u.real, u.imag, v.real, v.imag
    p0 = a * (c - d)
    p1 = b * (c + d)
    p2 = (a - b) * d
    return complex(p0 + p2, p1 + p2)


def naive_cmv(A, X) -> ComplexVector:
    """Ground-truth ``Y = A X`` built entry by entry from :func:`direct_complex_mult`."""
    A = ComplexMatrix.coerce(A)
    X = ComplexVector.coerce(X)
    if A.cols != len(X):
        raise ShapeError(f"matrix has {A.cols} columns but vector has length {len(X)}")
    y = np.zeros(A.rows, dtype=np.complex128)
    for m in range(A.rows):
        acc = 0j
        for n in range(A.cols):
            acc += direct_complex_mult(A.entries[m, n], X.entries[n])
        y[m] = acc
    return ComplexVector(y)


def winograd_inner_product(a, x) -> complex:
    """Inner product ``sum_k a_k x_k`` via Winograd's pairing.

    ``sum_k (a_2k + x_2k+1)(a_2k+1 + x_2k) - c - xi`` with
    ``c = sum a_2k a_2k+1`` and ``xi = sum x_2k x_2k+1``. Complex products are
    the direct ones. Length must be even; pad with :func:`pad_to_even` first.
    """
    a = ComplexVector.coerce(a).entries
    x = ComplexVector.coerce(x).entries
    if a.shape != x.shape:
        raise ShapeError(f"length mismatch: {a.shape[0]} vs {x.shape[0]}")
    if a.shape[0] % 2:
        raise ShapeError(f"odd length {a.shape[0]}; pad to even length first")
    total = 0j
    c = 0j
    xi = 0j
    for k in range(a.shape[0] // 2):
        total += direct_complex_mult(a[2 * k] + x[2 * k + 1], a[2 * k + 1] + x[2 * k])
        c += direct_complex_mult(a[2 * k], a[2 * k + 1])
        xi += direct_complex_mult(x[2 * k], x[2 * k + 1])
    return total - c - xi


def relative_error(computed, oracle) -> float:
    """``||computed - oracle||_inf / max(1, ||oracle||_inf)``."""
    computed = np.asarray(getattr(computed, "entries", computed))
    oracle = np.asarray(getattr(oracle, "entries", oracle))
    if computed.shape != oracle.shape:
        raise ShapeError(f"shape mismatch {computed.shape} vs {oracle.shape}")
    scale = max(1.0, float(np.max(np.abs(oracle), initial=0.0)))
    return float(np.max(np.abs(computed - oracle), initial=0.0)) / scale
