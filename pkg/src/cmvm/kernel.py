"""Compile a constant complex matrix into the Winograd + Gauss pipeline and
evaluate it.

Compile time folds everything that depends only on the matrix: the two
supervectors of odd/even columns and the row corrections ``c_m``. At run
time only the input-dependent correction ``xi`` and the lifted products are
computed, for a total of ``3N(M+1)/2`` real multiplications.

The pipeline body is written once in :func:`run_pipeline` against a tiny
arithmetic context, so :mod:`cmvm.dataflow` can replay it symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .core import (
    ComplexMatrix,
    ComplexVector,
    NonFiniteError,
    ShapeError,
    deinterleave,
    direct_complex_mult,
    interleave,
)
from .structured import (
    H,
    StructuredOperator,
    apply,
    build_broadcast,
    build_gauss_lift,
    build_P,
    build_sum_combine,
)


@dataclass(frozen=True)
class KernelOperators:
    p_main: StructuredOperator  # MN x N
    ga_lift: StructuredOperator  # 3MN/2 x MN
    gb_lift: StructuredOperator  # 3MN/2 x MN
    sigma: StructuredOperator  # 3M x 3MN/2
    hcomb: StructuredOperator  # 2M x 3M
    p_xi_bcast: StructuredOperator  # 2M x 2
    sigma_xi: StructuredOperator  # 3 x 3N/2
    h_xi: StructuredOperator  # 2 x 3
    ga_lift_xi: StructuredOperator  # 3N/2 x N
    gb_lift_xi: StructuredOperator  # 3N/2 x N

    def shape_table(self) -> dict[str, tuple[int, int]]:
        return {f.name: getattr(self, f.name).shape for f in fields(self)}


def build_operators(M: int, N: int) -> KernelOperators:
    sigma, hcomb = build_sum_combine(M, N)
    sigma_xi, _ = build_sum_combine(1, N)
    pairs = M * N // 2
    return KernelOperators(
        p_main=build_P(M, N),
        ga_lift=build_gauss_lift(pairs, "left"),
        gb_lift=build_gauss_lift(pairs, "right"),
        sigma=sigma,
        hcomb=hcomb,
        p_xi_bcast=build_broadcast(M),
        sigma_xi=sigma_xi,
        h_xi=H,
        ga_lift_xi=build_gauss_lift(N // 2, "left"),
        gb_lift_xi=build_gauss_lift(N // 2, "right"),
    )


@dataclass(frozen=True, eq=False)
class CompiledKernel:
    """Precomputed constants plus the operator pipeline for one matrix.

    ``a1`` holds the odd columns and ``a2`` the even columns, each as
    ``N/2`` blocks of ``2M`` interleaved reals. ``c_neg`` stores the negated
    row corrections so the run-time combination is purely additive.
    """

    M: int
    N: int
    a1: np.ndarray
    a2: np.ndarray
    c_neg: np.ndarray
    ops: KernelOperators

    def __post_init__(self):
        for name in ("a1", "a2", "c_neg"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.a1.shape != (self.M * self.N,) or self.a2.shape != (self.M * self.N,):
            raise ShapeError(f"supervectors must have length MN={self.M * self.N}")
        if self.c_neg.shape != (2 * self.M,):
            raise ShapeError(f"c_neg must have length 2M={2 * self.M}")


@dataclass(frozen=True)
class SplitInput:
    x1: np.ndarray  # x_0, x_2, ... interleaved
    x2: np.ndarray  # x_1, x_3, ... interleaved


def row_corrections(A: ComplexMatrix) -> np.ndarray:
    """``c_m = sum_k a_{m,2k} a_{m,2k+1}`` for every row (even N)."""
    c = np.zeros(A.rows, dtype=np.complex128)
    for m in range(A.rows):
        acc = 0j
        for k in range(A.cols // 2):
            acc += direct_complex_mult(A.entries[m, 2 * k], A.entries[m, 2 * k + 1])
        c[m] = acc
    return c


def compile_kernel(A) -> CompiledKernel:
    A = ComplexMatrix.coerce(A)
    M, N = A.rows, A.cols
    if N % 2:
        raise ShapeError(f"matrix has odd column count N={N}; call pad_to_even first")
    a1 = interleave(A.entries[:, 1::2].T.ravel())
    a2 = interleave(A.entries[:, 0::2].T.ravel())
    c_neg = -interleave(row_corrections(A))
    return CompiledKernel(M=M, N=N, a1=a1, a2=a2, c_neg=c_neg, ops=build_operators(M, N))


def split_input(X) -> SplitInput:
    X = ComplexVector.coerce(X)
    if len(X) % 2:
        raise ShapeError(f"input has odd length {len(X)}; pad to even length first")
    return SplitInput(x1=interleave(X.entries[0::2]), x2=interleave(X.entries[1::2]))


class NumericContext:
    """Plain floating-point arithmetic; stage boundaries are no-ops."""

    def stage(self, name: str, values):
        return values

    def multiply(self, u, v, name: str):
        return u * v


NUMERIC = NumericContext()


def _col(const, like):
    return const[:, None] if like.ndim == 2 else const


def _lifted_right(ops: KernelOperators, a2, x2, ctx):
    pre = ctx.stage("pre_add_b", _col(a2, x2) + apply(ops.p_main, x2))
    return ctx.stage("lift_b", apply(ops.gb_lift, pre))


def _lifted_left(ops: KernelOperators, a1, x1, ctx):
    pre = ctx.stage("pre_add_a", _col(a1, x1) + apply(ops.p_main, x1))
    return ctx.stage("lift_a", apply(ops.ga_lift, pre))


def _xi_negated(ops: KernelOperators, x1, x2, ctx):
    e = ctx.stage("xi_lift_b", apply(ops.gb_lift_xi, x2))
    l = ctx.stage("xi_lift_a", apply(ops.ga_lift_xi, x1))
    prod = ctx.multiply(l, e, "xi_mult")
    acc = ctx.stage("xi_block_sum", apply(ops.sigma_xi, prod))
    pair = ctx.stage("xi_combine", apply(ops.h_xi, acc))
    # negation and broadcast are wiring; the sign lands on the final adders
    return -apply(ops.p_xi_bcast, pair)


def run_pipeline(ops: KernelOperators, a1, a2, c_neg, x1, x2, ctx=NUMERIC):
    """Interleaved ``Y`` from split input halves.

    Order: right lift ``S``, left lift, products, block sums, combine,
    constant add, then the ``xi`` add.
    """
    s = _lifted_right(ops, a2, x2, ctx)
    l = _lifted_left(ops, a1, x1, ctx)
    prod = ctx.multiply(l, s, "mult")
    acc = ctx.stage("block_sum", apply(ops.sigma, prod))
    body = ctx.stage("combine", apply(ops.hcomb, acc))
    partial = ctx.stage("const_add", _col(c_neg, body) + body)
    xi = _xi_negated(ops, x1, x2, ctx)
    return ctx.stage("final_add", xi + partial)


def _check_half(kernel: CompiledKernel, v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[:1] != (kernel.N,):
        raise ShapeError(f"{what} must have length N={kernel.N}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"{what} contains non-finite entries")
    return v


def compute_S(kernel: CompiledKernel, x2) -> np.ndarray:
    """Diagonal multiplier inputs ``GB_lift (a2 + P x2)``, length ``3MN/2``."""
    x2 = _check_half(kernel, x2, "x2")
    return _lifted_right(kernel.ops, kernel.a2, x2, NUMERIC)


def compute_xi(x1, x2, M: int) -> np.ndarray:
    """Negated ``xi = sum_k x_2k x_2k+1`` broadcast to ``2M`` interleaved reals."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape or x1.ndim != 1 or x1.shape[0] % 2:
        raise ShapeError(f"x1 and x2 must be equal even-length vectors, got {x1.shape} and {x2.shape}")
    if M < 1:
        raise ShapeError(f"M must be positive, got {M}")
    return _xi_negated(build_operators(M, x1.shape[0]), x1, x2, NUMERIC)


def evaluate(kernel: CompiledKernel, X) -> ComplexVector:
    X = ComplexVector.coerce(X)
    if len(X) != kernel.N:
        raise ShapeError(f"kernel expects input length N={kernel.N}, got {len(X)}")
    parts = split_input(X)
    y = run_pipeline(kernel.ops, kernel.a1, kernel.a2, kernel.c_neg, parts.x1, parts.x2)
    return ComplexVector(deinterleave(y))


def evaluate_batch(kernel: CompiledKernel, Xs) -> np.ndarray:
    """Evaluate many inputs at once; ``Xs`` has shape (batch, N), result (batch, M)."""
    Xs = np.asarray(Xs, dtype=np.complex128)
    if Xs.ndim != 2 or Xs.shape[1] != kernel.N:
        raise ShapeError(f"expected batch of shape (b, {kernel.N}), got {Xs.shape}")
    if not np.all(np.isfinite(Xs)):
        raise NonFiniteError("batch contains non-finite entries")
    x1 = np.empty((kernel.N, Xs.shape[0]))
    x2 = np.empty((kernel.N, Xs.shape[0]))
    x1[0::2], x1[1::2] = Xs[:, 0::2].real.T, Xs[:, 0::2].imag.T
    x2[0::2], x2[1::2] = Xs[:, 1::2].real.T, Xs[:, 1::2].imag.T
    y = run_pipeline(kernel.ops, kernel.a1, kernel.a2, kernel.c_neg, x1, x2)
    return (y[0::2] + 1j * y[1::2]).T


def pad_to_even(A, X) -> tuple[ComplexMatrix, ComplexVector]:
    """Append one zero column / zero entry when N is odd."""
    A = ComplexMatrix.coerce(A)
    X = ComplexVector.coerce(X)
    if A.cols != len(X):
        raise ShapeError(f"matrix has {A.cols} columns but vector has length {len(X)}")
    if A.cols % 2 == 0:
        return A, X
    A = ComplexMatrix(np.hstack([A.entries, np.zeros((A.rows, 1))]))
    X = ComplexVector(np.append(X.entries, 0j))
    return A, X


def pad_matrix(A) -> ComplexMatrix:
    A = ComplexMatrix.coerce(A)
    if A.cols % 2 == 0:
        return A
    return ComplexMatrix(np.hstack([A.entries, np.zeros((A.rows, 1))]))
