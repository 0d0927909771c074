"""Compiled vs pure-Python theta lattice sums.

    python3 benchmarks/bench_theta.py [--points N] [--repeat R]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from rsvessel import theta as th
from rsvessel.theta import PeriodMatrix, ThetaChar, theta_batch

CASES = [
    ("genus1 tau=0.9i", PeriodMatrix([[0.9j]]), ThetaChar((0.3,), (0.0,)), [0]),
    ("genus1 deriv 2", PeriodMatrix([[0.2 + 0.6j]]), ThetaChar((0.5,), (0.5,)), [2]),
    ("genus2", PeriodMatrix([[0.2 + 1.1j, 0.3 + 0.1j], [0.3 + 0.1j, -0.1 + 0.9j]]),
     ThetaChar((0.3, 0.5), (0.1, 0.5)), [1, 0]),
]


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = th.available_backends()
    print(f"backends: {', '.join(backends)}; {args.points} points, best of {args.repeat}")
    rng = np.random.default_rng(0)
    for label, pm, chi, order in CASES:
        lams = rng.normal(size=(args.points, pm.g)) + 1j * rng.normal(scale=0.3, size=(args.points, pm.g))
        times = {}
        for b in backends:
            t = timeit.repeat(lambda: theta_batch(pm, chi, lams, order, backend=b), number=1, repeat=args.repeat)
            times[b] = min(t)
        row = "  ".join(f"{b}={times[b] * 1e3:8.2f} ms" for b in backends)
        if "compiled" in times:
            row += f"  speedup={times['python'] / times['compiled']:6.1f}x"
        print(f"{label:<18} {row}")


if __name__ == "__main__":
    main()
