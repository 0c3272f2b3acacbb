"""Weighted Büchi automata over ordered semirings, and their reduction to
acceptance automata when the multiplicative monoid is locally finite.

A weighted automaton multiplies transition weights along a run; the value of
a run is the limit superior of ``prefix_product * F(q_i)``. When only
finitely many prefix products can arise, the product can be carried in the
state instead, which leaves plain acceptance values.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .automata import AcceptanceAutomaton, LassoWord, _reachable, scc_ids
from .values import ONE, ZERO, as_rat, format_rat

DEFAULT_BOUND = 10_000


class LocalFinitenessError(ValueError):
    """The generated submonoid grew past the configured bound."""


@dataclass(frozen=True)
class SemiringDescriptor:
    """An ordered semiring on rationals in [0, 1].

    The reduction to acceptance automata needs ``plus`` to be the maximum of
    a total order, which holds for every instance defined here.
    """

    name: str
    plus: Callable[[Fraction, Fraction], Fraction] = field(compare=False)
    times: Callable[[Fraction, Fraction], Fraction] = field(compare=False)
    zero: Fraction = ZERO
    one: Fraction = ONE

    def leq(self, x: Fraction, y: Fraction) -> bool:
        return self.plus(x, y) == y

    def sum(self, xs: Iterable[Fraction]) -> Fraction:
        out = self.zero
        for x in xs:
            out = self.plus(out, x)
        return out

    def product(self, xs: Iterable[Fraction]) -> Fraction:
        out = self.one
        for x in xs:
            out = self.times(out, x)
        return out


FUZZY = SemiringDescriptor("fuzzy", max, min)


def _lukasiewicz(x: Fraction, y: Fraction) -> Fraction:
    return max(ZERO, x + y - 1)


# Locally finite on rationals: a product of generators below 1 drops by a
# fixed positive amount per factor until it hits 0.
LUKASIEWICZ = SemiringDescriptor("lukasiewicz", max, _lukasiewicz)


def generated_submonoid(
    weights: Iterable, semiring: SemiringDescriptor = FUZZY, bound: int = DEFAULT_BOUND
) -> frozenset:
    """Closure of ``weights`` together with the unit under ``times``."""
    gens = {as_rat(w) for w in weights}
    out = {semiring.one}
    frontier = [semiring.one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = semiring.times(x, g)
                if y not in out:
                    out.add(y)
                    if len(out) > bound:
                        raise LocalFinitenessError(
                            f"submonoid exceeds {bound} elements; is {semiring.name} locally finite here?"
                        )
                    nxt.append(y)
        frontier = nxt
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class WeightedAutomaton:
    """States are ``0..n-1``; ``delta[q][a]`` maps successors to weights.

    Missing successors have weight zero.
    """

    alphabet: tuple
    initial: tuple[Fraction, ...]
    delta: tuple[tuple[Mapping[int, Fraction], ...], ...]
    acceptance: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "initial", tuple(as_rat(x) for x in self.initial))
        object.__setattr__(
            self,
            "delta",
            tuple(tuple({int(t): as_rat(w) for t, w in row.items()} for row in rows) for rows in self.delta),
        )
        object.__setattr__(self, "acceptance", tuple(as_rat(x) for x in self.acceptance))
        self.validate()

    @property
    def n_states(self) -> int:
        return len(self.acceptance)

    def validate(self) -> None:
        n = self.n_states
        if len(self.initial) != n or len(self.delta) != n:
            raise ValueError("initial weights, transitions and acceptance must cover the same states")
        for x in self.initial + self.acceptance:
            if not ZERO <= x <= ONE:
                raise ValueError(f"weight {x} outside [0, 1]")
        for q, rows in enumerate(self.delta):
            if len(rows) != len(self.alphabet):
                raise ValueError(f"state {q} needs one transition row per letter")
            for row in rows:
                for t, w in row.items():
                    if not 0 <= t < n:
                        raise ValueError(f"state {q} has a transition to unknown state {t}")
                    if not ZERO <= w <= ONE:
                        raise ValueError(f"weight {w} outside [0, 1]")

    def weights(self) -> set[Fraction]:
        return {w for rows in self.delta for row in rows for w in row.values()}


def nondeterminize(
    Aw: WeightedAutomaton, semiring: SemiringDescriptor = FUZZY, bound: int = DEFAULT_BOUND
) -> AcceptanceAutomaton:
    """Acceptance automaton with the same language.

    States pair a weighted state with the product accumulated so far. The
    initial weight seeds that product. Successors whose product is zero are
    dropped; a state left without successors moves to a sink of value 0.
    """
    generated_submonoid(Aw.weights() | set(Aw.initial), semiring, bound)
    ids: dict = {}
    keys: list = []
    queue: deque = deque()

    def intern(key) -> int:
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(keys)
            keys.append(key)
            queue.append(key)
        return i

    initial = [intern((q, k)) for q, k in enumerate(Aw.initial) if k != semiring.zero]
    if not initial:
        initial = [intern("sink")]
    rows: dict[int, list] = {}
    while queue:
        key = queue.popleft()
        i = ids[key]
        if key == "sink":
            rows[i] = [(i,)] * len(Aw.alphabet)
            continue
        q, k = key
        row = []
        for a in range(len(Aw.alphabet)):
            succ = []
            for t, w in sorted(Aw.delta[q][a].items()):
                k2 = semiring.times(k, w)
                if k2 != semiring.zero:
                    succ.append(intern((t, k2)))
            row.append(tuple(succ) if succ else (intern("sink"),))
        rows[i] = row
    acceptance = [ZERO if key == "sink" else semiring.times(key[1], Aw.acceptance[key[0]]) for key in keys]
    labels = ["sink" if key == "sink" else f"({key[0]},{format_rat(key[1])})" for key in keys]
    return AcceptanceAutomaton(Aw.alphabet, [rows[i] for i in range(len(keys))], initial, acceptance, labels)


def fuzzy_lasso_value(Aw: WeightedAutomaton, w: LassoWord) -> Fraction:
    """Weighted language value on a lasso for the fuzzy semiring.

    With ``times = min`` a run is worth the minimum of its initial weight,
    every transition weight it uses, and the best acceptance value it visits
    infinitely often. So the value is at least ``c`` exactly when some run
    uses only edges of weight at least ``c`` and visits a state with
    acceptance at least ``c`` infinitely often. The largest such ``c`` is
    found by trying the finitely many weights that occur.
    """
    index = {a: i for i, a in enumerate(Aw.alphabet)}
    n_pos = len(w)
    letter_at = [index[w.letter(p)] for p in range(n_pos)]
    next_pos = [w.next_pos(p) for p in range(n_pos)]
    candidates = sorted({ZERO} | set(Aw.initial) | set(Aw.acceptance) | Aw.weights(), reverse=True)
    n = Aw.n_states

    def node(q: int, p: int) -> int:
        return q * n_pos + p

    for c in candidates:
        if c == ZERO:
            return ZERO
        succ: list[list[int]] = [[] for _ in range(n * n_pos)]
        for q in range(n):
            for p in range(n_pos):
                for t, wt in Aw.delta[q][letter_at[p]].items():
                    if wt >= c:
                        succ[node(q, p)].append(node(t, next_pos[p]))
        starts = [node(q, 0) for q in range(n) if Aw.initial[q] >= c]
        reach, _ = _reachable(succ, starts)
        comp = scc_ids(reach, succ.__getitem__)
        for v in reach:
            if Aw.acceptance[v // n_pos] < c:
                continue
            if any(comp[t] == comp[v] for t in succ[v]):
                return c
    return ZERO


def weighted_lasso_value(
    Aw: WeightedAutomaton, w: LassoWord, semiring: SemiringDescriptor = FUZZY
) -> Fraction:
    """Weighted language value on a lasso by enumerating lasso runs.

    Works for any instance in which ``times`` never increases a value. A run
    through the (state, position) graph that ends in a simple cycle is
    worth ``prefix * cycle^omega * max F on the cycle``, where the infinite
    power is the fixpoint of repeated multiplication. Only suitable for
    small inputs: runs are enumerated explicitly.
    """
    index = {a: i for i, a in enumerate(Aw.alphabet)}
    n_pos = len(w)
    letter_at = [index[w.letter(p)] for p in range(n_pos)]
    next_pos = [w.next_pos(p) for p in range(n_pos)]
    best = semiring.zero

    def omega_power(c: Fraction, k: Fraction) -> Fraction:
        while True:
            k2 = semiring.times(k, c)
            if k2 == k:
                return k
            k = k2

    def walk(path: list, weight: Fraction, pos_of: dict) -> None:
        nonlocal best
        q, p = path[-1]
        for t, wt in Aw.delta[q][letter_at[p]].items():
            nxt = (t, next_pos[p])
            k = semiring.times(weight, wt)
            if nxt in pos_of:
                start = pos_of[nxt]
                cyc = path[start:] + [nxt]
                prefix_w = weights[start]
                cycle_w = semiring.one
                for (q1, p1), (q2, _) in zip(cyc, cyc[1:]):
                    cycle_w = semiring.times(cycle_w, Aw.delta[q1][letter_at[p1]][q2])
                top = max(Aw.acceptance[x] for x, _ in cyc)
                best = semiring.plus(best, semiring.times(omega_power(cycle_w, prefix_w), top))
            else:
                pos_of[nxt] = len(path)
                path.append(nxt)
                weights.append(k)
                walk(path, k, pos_of)
                weights.pop()
                path.pop()
                del pos_of[nxt]

    for q in range(Aw.n_states):
        if Aw.initial[q] == semiring.zero:
            continue
        weights = [Aw.initial[q]]
        walk([(q, 0)], Aw.initial[q], {(q, 0): 0})
    return best


def weighted_to_dict(Aw: WeightedAutomaton) -> dict:
    """JSON shape of the automata export plus per-edge and initial weights."""
    from .automata import letter_to_json

    return {
        "kind": "weighted",
        "alphabet": [letter_to_json(a) for a in Aw.alphabet],
        "states": [
            {"id": q, "initial": format_rat(Aw.initial[q]), "acceptance": format_rat(Aw.acceptance[q])}
            for q in range(Aw.n_states)
        ],
        "transitions": [
            {"src": q, "letter": a, "dst": t, "weight": format_rat(wt)}
            for q in range(Aw.n_states)
            for a in range(len(Aw.alphabet))
            for t, wt in sorted(Aw.delta[q][a].items())
        ],
    }


def weighted_from_dict(data: dict) -> WeightedAutomaton:
    from .automata import letter_from_json
    from .values import parse_rat

    alphabet = tuple(letter_from_json(a) for a in data["alphabet"])
    states = sorted(data["states"], key=lambda s: s["id"])
    if [s["id"] for s in states] != list(range(len(states))):
        raise ValueError("state ids must be 0..n-1")
    delta: list[list[dict]] = [[{} for _ in alphabet] for _ in states]
    for tr in data["transitions"]:
        delta[tr["src"]][tr["letter"]][tr["dst"]] = parse_rat(tr["weight"])
    return WeightedAutomaton(
        alphabet,
        tuple(parse_rat(s.get("initial", "0")) for s in states),
        tuple(tuple(r) for r in delta),
        tuple(parse_rat(s["acceptance"]) for s in states),
    )


__all__ = [
    "DEFAULT_BOUND",
    "FUZZY",
    "LUKASIEWICZ",
    "LocalFinitenessError",
    "SemiringDescriptor",
    "WeightedAutomaton",
    "fuzzy_lasso_value",
    "generated_submonoid",
    "nondeterminize",
    "weighted_from_dict",
    "weighted_lasso_value",
    "weighted_to_dict",
]
