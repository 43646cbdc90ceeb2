#!/usr/bin/env python3
"""Stress the normalizer: random expressions, growing atom counts, timing
and output-size statistics.  Useful for tuning the consensus budget.

    python scripts/stress_normalize.py [--max-atoms 10] [--per-size 50]
"""

import argparse
import random
import statistics
import sys
import time

sys.path.insert(0, "tests")  # reuse the suite's generators

import gen  # noqa: E402

from classalgebra import normalize as nz  # noqa: E402
from classalgebra.errors import SizeBudgetExceededError  # noqa: E402


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--max-atoms", type=int, default=8)
    parser.add_argument("--per-size", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = random.Random(args.seed)

    print(f"{'atoms':>5} {'median ms':>10} {'p95 ms':>10} {'max conj':>9} {'budget hits':>12}")
    for n_atoms in range(2, args.max_atoms + 1):
        times, sizes, hits = [], [], 0
        for _ in range(args.per_size):
            cond = gen.random_expression(rng, n_atoms, depth=5)
            t0 = time.perf_counter()
            try:
                form = nz.sdnf(cond)
                sizes.append(len(form.conjuncts))
            except SizeBudgetExceededError:
                hits += 1
            times.append((time.perf_counter() - t0) * 1000)
        times.sort()
        print(
            f"{n_atoms:>5} {statistics.median(times):>10.2f} "
            f"{times[int(0.95 * (len(times) - 1))]:>10.2f} "
            f"{max(sizes) if sizes else 0:>9} {hits:>12}"
        )


if __name__ == "__main__":
    main()
