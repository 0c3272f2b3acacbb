"""Automaton sizes for a few formulas as the margin shrinks.

Each cell runs in its own process with a time limit, so the heavy
averaged cells can be cut off instead of stalling the table.

    python3 demos/table_sizes.py            # quick margins
    python3 demos/table_sizes.py --full     # adds 1/100, several minutes
"""

import argparse
from fractions import Fraction

from discsched.bench import BenchConfig, bench_sizes, emit_report

FORMULAS = (
    "F{1/2} p1",
    "F{99/100} p1",
    "F{1/2} G{1/2} p1",
    "avg(F{1/2} p1, F{1/2} p2)",
    "avg(F{1/2} p1, G{1/2} p2)",
    "avg(F{3/5} p1, F{3/5} p2)",
)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--timeout", type=float, default=60.0)
    args = ap.parse_args()
    eps = [Fraction(1, 10), Fraction(1, 50)] + ([Fraction(1, 100)] if args.full else [])
    cfg = BenchConfig(FORMULAS, tuple(eps), timeout=args.timeout)
    _, md = emit_report(bench_sizes(cfg, log=lambda c: print(f"# {c.formula} @ {c.eps}: {c.status}")))
    print(md)


if __name__ == "__main__":
    main()
