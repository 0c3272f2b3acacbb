"""A structure where no path attains the best value, and schedules that get close.

The structure can idle in s0 before passing through s1 (the only state
labelled p) into the sink s2. Under G{1/2} F p, waiting k steps in s0 is
worth 1 - (1/2)^(k+1), so every path falls short of 1 but a smaller margin
buys a longer wait.

    python3 demos/no_optimal_path.py
"""

from fractions import Fraction

from discsched.formula import parse_formula
from discsched.scheduler import parse_kts, schedule
from discsched.values import format_rat

KTS = """\
aps p
state s0 {}
state s1 {p}
state s2 {}
edge s0 s0
edge s0 s1
edge s1 s2
edge s2 s2
"""


def main() -> None:
    K = parse_kts(KTS)
    phi = parse_formula("G{1/2} F p")
    print(f"{'eps':>6}  {'path':<28} {'value':>8}  {'sup lies in':<14}  sizes (alt/nondet/product)")
    for k in range(1, 7):
        eps = Fraction(1, 2**k)
        res = schedule(K, phi, eps)
        lo, hi = res.sup_interval
        sup = f"[{format_rat(lo)}, {format_rat(hi)}]"
        st = res.stats
        sizes = f"{st['alternating_states']}/{st['nondeterministic_states']}/{st['product_states']}"
        print(f"{format_rat(eps):>6}  {str(res.path):<28} {format_rat(res.exact_value):>8}  {sup:<14}  {sizes}")

if __name__ == "__main__":
    main()
