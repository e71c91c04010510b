"""Measured vs. published hardware counts over an (M, N) grid.

    python scripts/cost_sweep.py --m-max 8 --n-max 16 [--csv out.csv]
"""

import argparse
import csv
import sys

import numpy as np

from cmvm import compile_kernel, count_costs, trace

FIELDS = [
    "M", "N", "multipliers", "naive_multipliers", "saving_pct", "encoders", "predicted_encoders",
    "add2", "predicted_add2", "block_sum_adders", "predicted_block_sum_adders",
]


def sweep(m_max, n_max, seed=0):
    rng = np.random.default_rng(seed)
    for M in range(1, m_max + 1):
        for N in range(2, n_max + 1, 2):
            A = rng.uniform(-1, 1, (M, N)) + 1j * rng.uniform(-1, 1, (M, N))
            r = count_costs(trace(compile_kernel(A)), M, N)
            yield {
                "M": M, "N": N,
                "multipliers": r.multipliers, "naive_multipliers": r.naive_multipliers,
                "saving_pct": round(100 * r.multiplier_saving, 2),
                "encoders": r.const_adders, "predicted_encoders": r.predicted_encoders,
                "add2": r.add2, "predicted_add2": r.predicted_add2,
                "block_sum_adders": r.block_sum_adders,
                "predicted_block_sum_adders": r.predicted_block_sum_adders,
            }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m-max", type=int, default=8)
    ap.add_argument("--n-max", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv")
    args = ap.parse_args()
    rows = list(sweep(args.m_max, args.n_max, args.seed))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, FIELDS)
            w.writeheader()
            w.writerows(rows)
    w = csv.DictWriter(sys.stdout, FIELDS, delimiter="\t")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
