"""Scheduling time and peak memory on seeded random Kripke structures.

    python3 demos/random_structures.py
"""

from fractions import Fraction

from discsched.bench import BenchConfig, bench_timing, emit_report


def main() -> None:
    cfg = BenchConfig(
        formulas=("avg(G{1/2} p1, G{1/2} p2)", "F{1/2} G{1/2} p1"),
        eps=(Fraction(1, 10),),
        sizes=(10, 100, 500),
        degrees=(3,),
        instances=3,
        seed=0,
        timeout=60,
    )
    _, md = emit_report(bench_timing(cfg))
    print(md)


if __name__ == "__main__":
    main()
