"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage / parse / I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .core import ComplexMatrix, ComplexVector, naive_cmv, relative_error
from .dataflow import count_costs, emit_dot, trace
from .kernel import compile_kernel, evaluate, pad_matrix, pad_to_even

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
TOLERANCE = 1e-12


class ProblemFileError(ValueError):
    pass


@dataclasses.dataclass
class Problem:
    matrix: ComplexMatrix
    vector: ComplexVector | None


def _pairs(doc, key: str, expected: int) -> list[list[float]]:
    items = doc[key]
    if not isinstance(items, list):
        raise ProblemFileError(f'field "{key}" must be an array of [re, im] pairs')
    if len(items) != expected:
        raise ProblemFileError(f'field "{key}" has {len(items)} entries, expected {expected}')
    for i, pair in enumerate(items):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        ):
            raise ProblemFileError(f'field "{key}"[{i}] must be a two-element [re, im] number array')
        if not all(math.isfinite(v) for v in pair):
            raise ProblemFileError(f'field "{key}"[{i}] contains a non-finite value')
    return items


def parse_problem(text: str) -> Problem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must be a JSON object")
    for key in ("m", "n", "matrix"):
        if key not in doc:
            raise ProblemFileError(f'missing required field "{key}"')
    m, n = doc["m"], doc["n"]
    for key, v in (("m", m), ("n", n)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ProblemFileError(f'field "{key}" must be a positive integer, got {v!r}')
    matrix = ComplexMatrix.from_pairs(m, n, _pairs(doc, "matrix", m * n))
    vector = None
    if doc.get("vector") is not None:
        vector = ComplexVector.from_pairs(_pairs(doc, "vector", n))
    return Problem(matrix, vector)


def load_problem(path) -> Problem:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    return parse_problem(text)


def problem_to_json(A, X=None) -> str:
    A = ComplexMatrix.coerce(A)
    doc = {
        "m": A.rows,
        "n": A.cols,
        "matrix": [[z.real, z.imag] for z in A.entries.ravel().tolist()],
    }
    if X is not None:
        doc["vector"] = [[z.real, z.imag] for z in ComplexVector.coerce(X).entries.tolist()]
    return json.dumps(doc)


def _fmt(x: float) -> str:
    return f"{x + 0.0:.17g}"


def cmd_compile(args) -> int:
    prob = load_problem(args.input)
    A = prob.matrix
    padded = pad_matrix(A)
    if padded.cols != A.cols:
        print(f"note: N={A.cols} is odd; padded with one zero column to N={padded.cols}")
    k = compile_kernel(padded)
    print(f"M = {k.M}")
    print(f"N = {k.N}")
    print(f"len(a1) = {k.a1.size}, len(a2) = {k.a2.size}, len(c_neg) = {k.c_neg.size}")
    print("operator shapes:")
    table = k.ops.shape_table()
    width = max(map(len, table))
    for name, (r, c) in table.items():
        print(f"  {name.ljust(width)}  {r}x{c}")
    if args.out:
        doc = {
            "m": k.M,
            "n": k.N,
            "padded": padded.cols != A.cols,
            "a1": k.a1.tolist(),
            "a2": k.a2.tolist(),
            "c_neg": k.c_neg.tolist(),
            "operators": {name: list(shape) for name, shape in table.items()},
        }
        _write(args.out, json.dumps(doc, indent=2) + "\n")
        print(f"wrote kernel constants to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    prob = load_problem(args.input)
    if prob.vector is None:
        raise ProblemFileError('eval needs a "vector" field in the problem file')
    if args.naive:
        y = naive_cmv(prob.matrix, prob.vector)
    else:
        A, X = pad_to_even(prob.matrix, prob.vector)
        y = evaluate(compile_kernel(A), X)
    for z in y.entries:
        print(f"{_fmt(z.real)} {_fmt(z.imag)}")
    return EXIT_OK


def random_instance(rng: np.random.Generator, M: int, N: int):
    """Uniform [-1, 1] real and imaginary parts for A (M x N) and X (N)."""
    A = rng.uniform(-1.0, 1.0, (M, N)) + 1j * rng.uniform(-1.0, 1.0, (M, N))
    X = rng.uniform(-1.0, 1.0, N) + 1j * rng.uniform(-1.0, 1.0, N)
    return A, X


def verify_grid(m_max: int, n_max: int, trials: int, seed: int, perturb_c: float = 0.0):
    """Worst relative error per (M, N) over seeded random instances."""
    rng = np.random.default_rng(seed)
    results = []
    for M in range(1, m_max + 1):
        for N in range(2, n_max + 1, 2):
            worst = 0.0
            for _ in range(trials):
                A, X = random_instance(rng, M, N)
                k = compile_kernel(A)
                if perturb_c:
                    k = dataclasses.replace(k, c_neg=k.c_neg + perturb_c)
                worst = max(worst, relative_error(evaluate(k, X), naive_cmv(A, X)))
            results.append((M, N, worst))
    return results


def cmd_verify(args) -> int:
    if args.n_max < 2 or args.m_max < 1 or args.trials < 1 or args.seed < 0:
        raise ProblemFileError("verify needs --m-max >= 1, --n-max >= 2, --trials >= 1 and --seed >= 0")
    results = verify_grid(args.m_max, args.n_max, args.trials, args.seed, args.perturb_c)
    failed = 0
    for M, N, worst in results:
        ok = worst <= TOLERANCE
        failed += not ok
        print(f"M={M} N={N} trials={args.trials} worst_rel_err={worst:.3e} {'PASS' if ok else 'FAIL'}")
    print(f"{len(results) - failed}/{len(results)} configurations passed at {TOLERANCE:g}")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _traced(path):
    A = pad_matrix(load_problem(path).matrix)
    return A, trace(compile_kernel(A))


def cmd_report(args) -> int:
    A, g = _traced(args.input)
    print(f"M = {A.rows}, N = {A.cols}")
    print(count_costs(g, A.rows, A.cols).table())
    return EXIT_OK


def cmd_dot(args) -> int:
    _, g = _traced(args.input)
    _write(args.out, emit_dot(g))
    print(f"wrote {args.out}: {len(g.nodes)} nodes, {len(g.edges)} edges")
    return EXIT_OK


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot write {path}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a matrix and print the kernel layout")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("eval", help="evaluate Y = A X through the compiled pipeline")
    p.add_argument("--input", required=True)
    p.add_argument("--naive", action="store_true", help="use the schoolbook oracle instead")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="seeded oracle-equivalence sweep")
    p.add_argument("--m-max", type=int, default=6)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb-c", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="hardware cost table")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dot", help="write the dataflow graph as DOT")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
