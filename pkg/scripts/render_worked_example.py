"""Write DOT files for the M=3, N=4 configuration: the factorized pipeline and
the schoolbook baseline. Render with e.g. ``dot -Tsvg pipeline_3x4.dot``."""

import argparse
from pathlib import Path

import numpy as np

from cmvm import compile_kernel, count_costs, emit_dot, trace, trace_naive


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("-m", type=int, default=3)
    ap.add_argument("-n", type=int, default=4)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(0)
    A = rng.uniform(-1, 1, (args.m, args.n)) + 1j * rng.uniform(-1, 1, (args.m, args.n))
    g = trace(compile_kernel(A))
    (out / f"pipeline_{args.m}x{args.n}.dot").write_text(emit_dot(g, "pipeline"))
    (out / f"naive_{args.m}x{args.n}.dot").write_text(emit_dot(trace_naive(A), "naive"))
    print(count_costs(g, args.m, args.n).table())
    print(f"wrote DOT files to {out}/")


if __name__ == "__main__":
    main()
