"""Complex constant matrix-vector multiplication via Winograd's inner-product
pairing and Gauss's three-multiplication complex product."""

from .core import (
    ComplexMatrix,
    ComplexVector,
    NonFiniteError,
    ShapeError,
    deinterleave,
    direct_complex_mult,
    gauss_complex_mult,
    gauss_pipeline_mult,
    interleave,
    naive_cmv,
    relative_error,
    winograd_inner_product,
)
from .dataflow import CostReport, DataflowGraph, count_costs, emit_dot, trace, trace_naive
from .kernel import (
    CompiledKernel,
    compile_kernel,
    compute_S,
    compute_xi,
    evaluate,
    evaluate_batch,
    pad_to_even,
    split_input,
)

__all__ = [
    "ComplexMatrix", "ComplexVector", "NonFiniteError", "ShapeError",
    "deinterleave", "direct_complex_mult", "gauss_complex_mult", "gauss_pipeline_mult",
    "interleave", "naive_cmv", "relative_error", "winograd_inner_product",
    "CostReport", "DataflowGraph", "count_costs", "emit_dot", "trace", "trace_naive",
    "CompiledKernel", "compile_kernel", "compute_S", "compute_xi", "evaluate",
    "evaluate_batch", "pad_to_even", "split_input",
]
