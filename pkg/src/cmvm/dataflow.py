"""Trace compiled kernels into explicit real-arithmetic DAGs, count the
hardware they imply, and render them as DOT.

The tracer replays :func:`cmvm.kernel.run_pipeline` with symbolic values.
Additions stay lazy (a signed sum of node references) until the pipeline
crosses a stage boundary; at that point each pending sum becomes one adder
node. Structured-operator wiring (broadcasts, identities, block selection)
therefore costs nothing, exactly as in hardware.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .core import ComplexMatrix, ComplexVector, ShapeError, deinterleave, interleave
from .kernel import CompiledKernel, run_pipeline


class NodeKind(enum.Enum):
    INPUT = "input"
    CONSTANT = "constant"
    CONST_ADD = "const_add"  # one variable + one constant: an "encoder"
    ADD2 = "add2"
    MULTI_ADD = "multi_add"
    MULT = "mult"
    OUTPUT = "output"


ADDER_KINDS = (NodeKind.CONST_ADD, NodeKind.ADD2, NodeKind.MULTI_ADD)
BLOCK_SUM_REGIONS = ("block_sum", "xi_block_sum")


class TraceError(RuntimeError):
    pass


@dataclass(frozen=True)
class DataflowNode:
    id: int
    kind: NodeKind
    operands: tuple[int, ...] = ()
    signs: tuple[int, ...] = ()
    label: str = ""
    region: str = ""
    value: float | None = None  # constants only
    index: int | None = None  # input position in interleaved X / output position in Y

    @property
    def fan_in(self) -> int:
        return len(self.operands)


@dataclass
class DataflowGraph:
    nodes: list[DataflowNode] = field(default_factory=list)

    def add(self, kind: NodeKind, operands=(), signs=None, **kw) -> int:
        nid = len(self.nodes)
        operands = tuple(operands)
        signs = tuple(signs) if signs is not None else (1,) * len(operands)
        self.nodes.append(DataflowNode(nid, kind, operands, signs, **kw))
        return nid

    def of_kind(self, kind: NodeKind) -> list[DataflowNode]:
        return [n for n in self.nodes if n.kind is kind]

    @property
    def inputs(self) -> list[DataflowNode]:
        return sorted(self.of_kind(NodeKind.INPUT), key=lambda n: n.index)

    @property
    def outputs(self) -> list[DataflowNode]:
        return sorted(self.of_kind(NodeKind.OUTPUT), key=lambda n: n.index)

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        """``(src, dst, sign)`` triples."""
        return [(src, n.id, s) for n in self.nodes for src, s in zip(n.operands, n.signs)]

    def kind_counts(self) -> Counter:
        return Counter(n.kind for n in self.nodes)

    def validate(self) -> None:
        """Raise :class:`TraceError` if any structural invariant is broken."""
        for n in self.nodes:
            if any(op >= n.id for op in n.operands):
                raise TraceError(f"node {n.id} references a later node; graph not topologically ordered")
            if len(n.signs) != len(n.operands) or any(s not in (1, -1) for s in n.signs):
                raise TraceError(f"node {n.id} has a malformed sign mask")
            k = n.fan_in
            if n.kind in (NodeKind.INPUT, NodeKind.CONSTANT) and k:
                raise TraceError(f"source node {n.id} has operands")
            if n.kind in (NodeKind.MULT, NodeKind.ADD2) and k != 2:
                raise TraceError(f"{n.kind.value} node {n.id} has {k} operands")
            if n.kind is NodeKind.MULTI_ADD and k < 3:
                raise TraceError(f"multi-adder node {n.id} has only {k} operands")
            if n.kind is NodeKind.OUTPUT and k != 1:
                raise TraceError(f"output node {n.id} has {k} operands")
            if n.kind is NodeKind.CONST_ADD:
                consts = sum(self.nodes[o].kind is NodeKind.CONSTANT for o in n.operands)
                if k != 2 or consts != 1:
                    raise TraceError(f"encoder node {n.id} needs one constant and one variable operand")
        # every output must reach back to sources only through existing nodes
        live = set()
        stack = [o.id for o in self.outputs]
        while stack:
            nid = stack.pop()
            if nid in live:
                continue
            live.add(nid)
            stack.extend(self.nodes[nid].operands)
        if not any(self.nodes[i].kind in (NodeKind.INPUT, NodeKind.CONSTANT) for i in live):
            raise TraceError("outputs are not connected to any source")

    def evaluate(self, X) -> ComplexVector:
        """Forward pass with real numbers, one node at a time."""
        x = interleave(ComplexVector.coerce(X))
        ins = self.inputs
        if x.shape[0] != len(ins):
            raise ShapeError(f"graph has {len(ins)} real inputs, got {x.shape[0]}")
        vals = np.zeros(len(self.nodes))
        for n in self.nodes:
            if n.kind is NodeKind.INPUT:
                vals[n.id] = x[n.index]
            elif n.kind is NodeKind.CONSTANT:
                vals[n.id] = n.value
            elif n.kind is NodeKind.MULT:
                vals[n.id] = vals[n.operands[0]] * vals[n.operands[1]]
            else:
                acc = 0.0
                for op, s in zip(n.operands, n.signs):
                    acc = acc + vals[op] if s > 0 else acc - vals[op]
                vals[n.id] = acc
        return ComplexVector(deinterleave(np.array([vals[o.id] for o in self.outputs])))


class Expr:
    """Pending signed sum of graph nodes."""

    __slots__ = ("tracer", "terms")

    def __init__(self, tracer: "TraceContext", terms: dict[int, float]):
        self.tracer = tracer
        self.terms = terms

    def __add__(self, other):
        if isinstance(other, (int, float)) and other == 0:
            return self
        if not isinstance(other, Expr):
            return NotImplemented
        terms = dict(self.terms)
        for nid, c in other.terms.items():
            terms[nid] = terms.get(nid, 0.0) + c
            if terms[nid] == 0:
                del terms[nid]
        return Expr(self.tracer, terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr(self.tracer, {nid: -c for nid, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, coef):
        if isinstance(coef, Expr):
            raise TraceError("variable products must go through TraceContext.multiply")
        coef = float(coef)
        if coef == 0:
            return Expr(self.tracer, {})
        return Expr(self.tracer, {nid: c * coef for nid, c in self.terms.items()})

    __rmul__ = __mul__


class TraceContext:
    """Arithmetic context that records nodes instead of computing numbers."""

    def __init__(self, graph: DataflowGraph):
        self.graph = graph

    def leaf(self, nid: int) -> Expr:
        return Expr(self, {nid: 1.0})

    def realize(self, e: Expr, region: str) -> int:
        items = list(e.terms.items())
        if any(c not in (1.0, -1.0) for _, c in items):
            raise TraceError(f"non-unit coefficient in {region}: {items}")
        if not items:
            raise TraceError(f"structurally zero value in {region}")
        if len(items) == 1:
            nid, c = items[0]
            if c != 1.0:
                raise TraceError(f"bare negation in {region} has no adder to absorb it")
            return nid
        ops = [nid for nid, _ in items]
        signs = [int(c) for _, c in items]
        if len(items) >= 3:
            kind = NodeKind.MULTI_ADD
        elif sum(self.graph.nodes[o].kind is NodeKind.CONSTANT for o in ops) == 1:
            kind = NodeKind.CONST_ADD
        else:
            kind = NodeKind.ADD2
        label = "sum" if kind is NodeKind.MULTI_ADD else "+"
        return self.graph.add(kind, ops, signs, label=label, region=region)

    def stage(self, name: str, values):
        out = np.empty(values.shape, dtype=object)
        for i, e in enumerate(values):
            out[i] = self.leaf(self.realize(e, name))
        return out

    def multiply(self, u, v, name: str):
        out = np.empty(u.shape, dtype=object)
        for i, (a, b) in enumerate(zip(u, v)):
            ops = (self.realize(a, name), self.realize(b, name))
            out[i] = self.leaf(self.graph.add(NodeKind.MULT, ops, label="*", region=name))
        return out


def _leaves(ctx: TraceContext, ids) -> np.ndarray:
    out = np.empty(len(ids), dtype=object)
    for i, nid in enumerate(ids):
        out[i] = ctx.leaf(nid)
    return out


def trace(kernel: CompiledKernel) -> DataflowGraph:
    """Dataflow graph of the compiled pipeline, built by running it symbolically."""
    g = DataflowGraph()
    ctx = TraceContext(g)
    N, M = kernel.N, kernel.M
    x_ids = [
        g.add(NodeKind.INPUT, label=f"x{i // 2}.{'re' if i % 2 == 0 else 'im'}", index=i)
        for i in range(2 * N)
    ]
    x1 = _leaves(ctx, [x_ids[4 * k + j] for k in range(N // 2) for j in (0, 1)])
    x2 = _leaves(ctx, [x_ids[4 * k + 2 + j] for k in range(N // 2) for j in (0, 1)])

    def consts(name, arr):
        ids = [g.add(NodeKind.CONSTANT, label=f"{name}[{i}]", value=float(v)) for i, v in enumerate(arr)]
        return _leaves(ctx, ids)

    a1 = consts("a1", kernel.a1)
    a2 = consts("a2", kernel.a2)
    c_neg = consts("c", kernel.c_neg)
    y = run_pipeline(kernel.ops, a1, a2, c_neg, x1, x2, ctx)
    for i, e in enumerate(y):
        src = ctx.realize(e, "final_add")
        g.add(NodeKind.OUTPUT, (src,), label=f"y{i // 2}.{'re' if i % 2 == 0 else 'im'}", index=i)
    return g


def trace_naive(A) -> DataflowGraph:
    """Fully parallel schoolbook graph: 4 multiplies per complex product."""
    A = ComplexMatrix.coerce(A)
    M, N = A.rows, A.cols
    g = DataflowGraph()
    x_ids = [
        g.add(NodeKind.INPUT, label=f"x{i // 2}.{'re' if i % 2 == 0 else 'im'}", index=i)
        for i in range(2 * N)
    ]
    out = 0
    for m in range(M):
        re_terms, im_terms = [], []
        for n in range(N):
            a = g.add(NodeKind.CONSTANT, label=f"a{m},{n}.re", value=float(A.entries[m, n].real))
            b = g.add(NodeKind.CONSTANT, label=f"a{m},{n}.im", value=float(A.entries[m, n].imag))
            c, d = x_ids[2 * n], x_ids[2 * n + 1]
            ac, bd, ad, bc = (
                g.add(NodeKind.MULT, (p, q), label="*", region="naive_mult")
                for p, q in ((a, c), (b, d), (a, d), (b, c))
            )
            re_terms.append(g.add(NodeKind.ADD2, (ac, bd), (1, -1), label="+", region="naive_combine"))
            im_terms.append(g.add(NodeKind.ADD2, (ad, bc), label="+", region="naive_combine"))
        for terms in (re_terms, im_terms):
            if len(terms) == 1:
                src = terms[0]
            else:
                kind = NodeKind.ADD2 if len(terms) == 2 else NodeKind.MULTI_ADD
                src = g.add(kind, terms, label="sum", region="row_sum")
            g.add(NodeKind.OUTPUT, (src,), label=f"y{m}.{'re' if out % 2 == 0 else 'im'}", index=out)
            out += 1
    return g


@dataclass
class ReconciliationLine:
    quantity: str
    measured: int
    predicted: int
    explanation: str

    @property
    def delta(self) -> int:
        return self.measured - self.predicted


@dataclass
class CostReport:
    M: int
    N: int
    multipliers: int
    const_adders: int
    add2: int  # two-input adders outside the block-sum stage
    block_sum_adders: int  # adders of fan-in N/2 (any kind)
    multi_adders: list[tuple[int, int]]  # (fan-in, count) of MULTI_ADD nodes
    add2_by_region: dict[str, int]
    naive_multipliers: int
    naive_add2: int
    naive_row_adders: int
    predicted_multipliers: int
    predicted_encoders: int
    predicted_add2: int
    predicted_block_sum_adders: int
    predicted_signed_add2: int  # encoder-free variant
    identity_holds: bool
    reconciliation: list[ReconciliationLine]

    @property
    def multiplier_saving(self) -> float:
        return 1.0 - self.multipliers / self.naive_multipliers

    @property
    def block_sum_binary_tree_add2(self) -> int:
        """Two-input adders needed if every block-sum adder became a binary tree."""
        return self.block_sum_adders * (self.N // 2 - 1)

    def table(self) -> str:
        rows = [
            ("quantity", "measured", "predicted", "naive"),
            ("multipliers", self.multipliers, self.predicted_multipliers, self.naive_multipliers),
            ("encoders (const adders)", self.const_adders, self.predicted_encoders, "-"),
            ("two-input adders", self.add2, self.predicted_add2, self.naive_add2),
            (f"({self.N // 2})-input block-sum adders", self.block_sum_adders,
             self.predicted_block_sum_adders, "-"),
            ("signed two-input adders (no encoders)", self.const_adders + self.add2,
             self.predicted_signed_add2, "-"),
            (f"({self.N})-input row adders", "-", "-", self.naive_row_adders),
        ]
        widths = [max(len(str(r[i])) for r in rows) for i in range(4)]
        lines = ["  ".join(str(c).ljust(w) if i == 0 else str(c).rjust(w)
                           for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append("")
        lines.append(f"multiplier saving vs naive: {100 * self.multiplier_saving:.2f}%")
        lines.append(f"block sums expanded to binary trees: {self.block_sum_binary_tree_add2} two-input adders")
        lines.append(
            "adder formula identity 2M(N+1) + M(N+4)+1.5N+2 == 3M(N+2)+1.5N+2: "
            + ("holds" if self.identity_holds else "FAILS")
        )
        lines.append("two-input adders by region: "
                     + ", ".join(f"{k}={v}" for k, v in sorted(self.add2_by_region.items())))
        for r in self.reconciliation:
            lines.append(f"{r.quantity}: measured {r.measured}, predicted {r.predicted}, "
                         f"delta {r.delta:+d}; {r.explanation}")
        return "\n".join(lines)


def predicted_counts(M: int, N: int) -> dict[str, int]:
    """Published resource formulas evaluated at (M, N); N must be even."""
    if N % 2:
        raise ShapeError(f"formulas assume even N, got {N}")
    return {
        "multipliers": 3 * N * (M + 1) // 2,
        "encoders": 2 * M * (N + 1),
        "add2": M * (N + 4) + 3 * N // 2 + 2,
        "block_sum_adders": 3 * (M + 1),
        "signed_add2": 3 * M * (N + 2) + 3 * N // 2 + 2,
        "naive_multipliers": 4 * M * N,
        "naive_add2": 2 * M * N,
        "naive_row_adders": 2 * M,
    }


def adder_identity_holds(M: int, N: int) -> bool:
    p = predicted_counts(M, N)
    return p["encoders"] + p["add2"] == p["signed_add2"]


def count_costs(graph: DataflowGraph, M: int, N: int) -> CostReport:
    p = predicted_counts(M, N)
    half = N // 2
    block = [n for n in graph.nodes if n.region in BLOCK_SUM_REGIONS and n.kind in ADDER_KINDS]
    if any(n.fan_in != half for n in block):
        raise TraceError("block-sum adder with unexpected fan-in")
    kinds = graph.kind_counts()
    add2_nodes = [n for n in graph.of_kind(NodeKind.ADD2) if n.region not in BLOCK_SUM_REGIONS]
    by_region = Counter(n.region for n in add2_nodes)
    multi = Counter(n.fan_in for n in graph.of_kind(NodeKind.MULTI_ADD))

    lift = by_region.get("lift_a", 0) + by_region.get("lift_b", 0)
    recon = [
        ReconciliationLine("multipliers", kinds[NodeKind.MULT], p["multipliers"],
                           "3 per complex product: MN/2 body products plus N/2 for xi"),
        ReconciliationLine("encoders", kinds[NodeKind.CONST_ADD], p["encoders"],
                           "2MN supervector pre-adds plus 2M constant-correction adds"),
        ReconciliationLine(
            "two-input adders", len(add2_nodes), p["add2"],
            f"body Gauss lifts use {lift} adders (MN/2 left, MN right) where the "
            f"formula leaves room for only MN={M * N}; other regions agree",
        ),
        ReconciliationLine(
            "block-sum adders", len(block), p["block_sum_adders"],
            f"3M body sums plus 3 xi sums, each of fan-in {half}" if half > 1
            else "with N=2 each block sum has one operand and reduces to a wire",
        ),
        ReconciliationLine("signed two-input adders", kinds[NodeKind.CONST_ADD] + len(add2_nodes),
                           p["signed_add2"], "encoder-free variant; inherits the lift-region delta"),
    ]
    return CostReport(
        M=M,
        N=N,
        multipliers=kinds[NodeKind.MULT],
        const_adders=kinds[NodeKind.CONST_ADD],
        add2=len(add2_nodes),
        block_sum_adders=len(block),
        multi_adders=sorted(multi.items()),
        add2_by_region=dict(by_region),
        naive_multipliers=p["naive_multipliers"],
        naive_add2=p["naive_add2"],
        naive_row_adders=p["naive_row_adders"],
        predicted_multipliers=p["multipliers"],
        predicted_encoders=p["encoders"],
        predicted_add2=p["add2"],
        predicted_block_sum_adders=p["block_sum_adders"],
        predicted_signed_add2=p["signed_add2"],
        identity_holds=adder_identity_holds(M, N),
        reconciliation=recon,
    )


_SHAPES = {
    NodeKind.INPUT: "plaintext",
    NodeKind.CONSTANT: "plaintext",
    NodeKind.OUTPUT: "plaintext",
    NodeKind.MULT: "circle",
    NodeKind.CONST_ADD: "box",
    NodeKind.ADD2: "box",
    NodeKind.MULTI_ADD: "box",
}


def emit_dot(graph: DataflowGraph, name: str = "cmvm") -> str:
    """DOT digraph, left to right; circles multiply, boxes add, dashed edges subtract."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for n in graph.nodes:
        label = n.label.replace('"', '\\"')
        extra = ', fontcolor="gray40"' if n.kind is NodeKind.CONSTANT else ""
        lines.append(f'  n{n.id} [label="{label}", shape={_SHAPES[n.kind]}{extra}];')
    for src, dst, sign in graph.edges:
        style = " [style=dashed]" if sign < 0 else ""
        lines.append(f"  n{src} -> n{dst}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
