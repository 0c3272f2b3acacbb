"""[0,1]-acceptance Büchi automata, their alternating variant, and lassos.

A nondeterministic automaton assigns a word the greatest acceptance value
visited infinitely often by some run. An alternating automaton has
transitions in disjunctive normal form whose conjuncts mix successor states
with value leaves; a word's value is the max over run trees of the min over
branches. States are integers ``0..n-1``; letters are arbitrary hashable
objects, usually frozensets of atomic propositions.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Sequence

from .formula import QualityOp
from .games import MAX, MIN, solve_buchi
from .values import ONE, ZERO, format_rat, parse_rat

Letter = Hashable
BULLET = "•"

# A disjunct is (frozenset of successor states, value); a transition is a
# frozenset of disjuncts read as their disjunction.
Disjunct = tuple[frozenset, Fraction]
Dnf = frozenset

TOP: Dnf = frozenset({(frozenset(), ONE)})


class AutomatonError(ValueError):
    pass


# --------------------------------------------------------------------------
# DNF helpers


def dnf_leaf(v: Fraction) -> Dnf:
    return frozenset({(frozenset(), Fraction(v))})


def dnf_state(q: Hashable) -> Dnf:
    return frozenset({(frozenset({q}), ONE)})


def dnf_or(a: Dnf, b: Dnf) -> Dnf:
    return simplify_dnf(a | b)


def dnf_and(a: Dnf, b: Dnf) -> Dnf:
    return simplify_dnf(frozenset((sa | sb, min(va, vb)) for sa, va in a for sb, vb in b))


def simplify_dnf(d: Iterable[Disjunct]) -> Dnf:
    """Drop disjuncts absorbed by another one.

    ``(S, v)`` absorbs ``(S', v')`` when ``S`` is a subset of ``S'`` and
    ``v >= v'``: the max over disjuncts can never prefer the weaker one.
    """
    items = sorted(set(d), key=lambda x: (len(x[0]), -x[1]))
    kept: list[Disjunct] = []
    for s, v in items:
        if any(ks <= s and kv >= v for ks, kv in kept):
            continue
        kept.append((s, v))
    return frozenset(kept)


def merge_dnf(d: Iterable[Disjunct]) -> Dnf:
    """Keep one disjunct per state set, the one with the greatest value."""
    best: dict[frozenset, Fraction] = {}
    for s, v in d:
        old = best.get(s)
        if old is None or v > old:
            best[s] = v
    return frozenset(best.items())


def drop_leaf_dominated(d: Iterable[Disjunct]) -> Dnf:
    """Drop disjuncts whose value is matched by a pure leaf disjunct."""
    items = set(d)
    top = max((v for s, v in items if not s), default=None)
    if top is None:
        return frozenset(items)
    return frozenset((s, v) for s, v in items if (not s and v == top) or (s and v > top))


def dnf_leaf_values(d: Dnf) -> set[Fraction]:
    return {v for _, v in d}


def format_dnf(d: Dnf, label: Callable[[int], str] = str) -> str:
    parts = []
    for s, v in sorted(d, key=lambda x: (sorted(map(str, x[0])), x[1])):
        atoms_ = [label(q) for q in sorted(s, key=str)]
        if v != ONE or not atoms_:
            atoms_.append(format_rat(v))
        parts.append(" & ".join(atoms_))
    return " | ".join(parts)


# --------------------------------------------------------------------------
# Automata


def _index_letters(alphabet: Sequence[Letter]) -> dict:
    index = {a: i for i, a in enumerate(alphabet)}
    if len(index) != len(alphabet):
        raise AutomatonError("alphabet contains duplicate letters")
    return index


@dataclass(frozen=True, eq=False)
class AcceptanceAutomaton:
    """Nondeterministic [0,1]-acceptance Büchi automaton.

    ``delta[q][a]`` is the tuple of successors of state ``q`` on the letter
    with index ``a``.
    """

    alphabet: tuple
    delta: tuple
    initial: tuple
    acceptance: tuple
    labels: Optional[tuple] = None
    _letter_index: dict = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "delta", tuple(tuple(tuple(row) for row in q) for q in self.delta))
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "acceptance", tuple(Fraction(x) for x in self.acceptance))
        object.__setattr__(self, "_letter_index", _index_letters(self.alphabet))
        self.validate()

    @property
    def n_states(self) -> int:
        return len(self.acceptance)

    def letter_index(self, a: Letter) -> int:
        try:
            return self._letter_index[a]
        except KeyError:
            raise AutomatonError(f"letter {a!r} is not in the alphabet") from None

    def validate(self) -> None:
        n = len(self.acceptance)
        if len(self.delta) != n:
            raise AutomatonError("transition table and acceptance disagree on the state count")
        if not self.initial:
            raise AutomatonError("initial set is empty")
        for q in self.initial:
            if not 0 <= q < n:
                raise AutomatonError(f"initial state {q} out of range")
        for q, row in enumerate(self.delta):
            if len(row) != len(self.alphabet):
                raise AutomatonError(f"state {q} lacks transitions for some letters")
            for a, succ in enumerate(row):
                if not succ:
                    raise AutomatonError(f"state {q} has no successor on letter {self.alphabet[a]!r}")
                for t in succ:
                    if not 0 <= t < n:
                        raise AutomatonError(f"successor {t} of state {q} out of range")
        for x in self.acceptance:
            if not ZERO <= x <= ONE:
                raise AutomatonError(f"acceptance value {x} outside [0,1]")
        if self.labels is not None and len(self.labels) != n:
            raise AutomatonError("one label per state is required")

    def label(self, q: int) -> str:
        return str(self.labels[q]) if self.labels is not None else str(q)


@dataclass(frozen=True, eq=False)
class AlternatingAutomaton:
    """Alternating [0,1]-acceptance automaton; ``delta[q][a]`` is a DNF."""

    alphabet: tuple
    delta: tuple
    initial: tuple
    acceptance: tuple
    labels: Optional[tuple] = None
    _letter_index: dict = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "delta", tuple(tuple(frozenset(d) for d in q) for q in self.delta))
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "acceptance", tuple(Fraction(x) for x in self.acceptance))
        object.__setattr__(self, "_letter_index", _index_letters(self.alphabet))
        self.validate()

    @property
    def n_states(self) -> int:
        return len(self.acceptance)

    def letter_index(self, a: Letter) -> int:
        try:
            return self._letter_index[a]
        except KeyError:
            raise AutomatonError(f"letter {a!r} is not in the alphabet") from None

    def validate(self) -> None:
        n = len(self.acceptance)
        if len(self.delta) != n:
            raise AutomatonError("transition table and acceptance disagree on the state count")
        if not self.initial:
            raise AutomatonError("initial set is empty")
        for q, row in enumerate(self.delta):
            if len(row) != len(self.alphabet):
                raise AutomatonError(f"state {q} lacks transitions for some letters")
            for dnf in row:
                if not dnf:
                    raise AutomatonError(f"state {q} has an empty disjunction")
                for states, v in dnf:
                    if not ZERO <= v <= ONE:
                        raise AutomatonError(f"leaf value {v} outside [0,1]")
                    for t in states:
                        if not 0 <= t < n:
                            raise AutomatonError(f"successor {t} of state {q} out of range")
        for x in self.acceptance:
            if not ZERO <= x <= ONE:
                raise AutomatonError(f"acceptance value {x} outside [0,1]")

    def label(self, q: int) -> str:
        return str(self.labels[q]) if self.labels is not None else str(q)

    def leaf_values(self) -> set[Fraction]:
        out: set[Fraction] = set()
        for row in self.delta:
            for dnf in row:
                out |= dnf_leaf_values(dnf)
        return out

    def leaf_count(self) -> int:
        return len(self.leaf_values())


def as_alternating(A: AcceptanceAutomaton) -> AlternatingAutomaton:
    """View a nondeterministic automaton as an alternating one."""
    delta = [[frozenset((frozenset({t}), ONE) for t in succ) for succ in row] for row in A.delta]
    return AlternatingAutomaton(A.alphabet, delta, A.initial, A.acceptance, A.labels)


# --------------------------------------------------------------------------
# Lassos


@dataclass(frozen=True)
class LassoWord:
    """The ultimately periodic word ``prefix . cycle^omega``."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise ValueError("the cycle of a lasso must be nonempty")

    def __len__(self) -> int:
        return len(self.prefix) + len(self.cycle)

    def letter(self, pos: int) -> Letter:
        """Letter at position ``pos`` of the lasso structure (``pos < len(self)``)."""
        u = len(self.prefix)
        return self.prefix[pos] if pos < u else self.cycle[pos - u]

    def next_pos(self, pos: int) -> int:
        return pos + 1 if pos + 1 < len(self) else len(self.prefix)

    def at(self, i: int) -> Letter:
        """Letter at an arbitrary index of the infinite word."""
        u = len(self.prefix)
        if i < u:
            return self.prefix[i]
        return self.cycle[(i - u) % len(self.cycle)]

    def canonical(self) -> "LassoWord":
        """Shortest representation of the same infinite word."""
        v = list(self.cycle)
        n = len(v)
        for p in range(1, n + 1):
            if n % p == 0 and v == v[:p] * (n // p):
                v = v[:p]
                break
        u = list(self.prefix)
        while u and u[-1] == v[-1]:
            u.pop()
            v = [v[-1]] + v[:-1]
        return LassoWord(tuple(u), tuple(v))


@dataclass(frozen=True)
class LassoRun:
    """A run ``prefix . cycle^omega``; ``cycle[0]`` is the knot.

    ``word`` carries the letters read, aligned with the states.
    """

    prefix: tuple
    cycle: tuple
    word: LassoWord

    @property
    def knot(self) -> int:
        return self.cycle[0]


def all_lassos(alphabet: Sequence[Letter], max_prefix: int, max_cycle: int) -> Iterable[LassoWord]:
    for lu in range(max_prefix + 1):
        for u in itertools.product(alphabet, repeat=lu):
            for lv in range(1, max_cycle + 1):
                for v in itertools.product(alphabet, repeat=lv):
                    yield LassoWord(u, v)


# --------------------------------------------------------------------------
# Graph utilities


def _reachable(succ: Sequence[Sequence[int]], roots: Iterable[int]) -> tuple[dict, dict]:
    """BFS distances and parents from a set of roots."""
    dist: dict[int, int] = {}
    parent: dict[int, Optional[int]] = {}
    queue = deque()
    for r in roots:
        if r not in dist:
            dist[r] = 0
            parent[r] = None
            queue.append(r)
    while queue:
        q = queue.popleft()
        for t in succ[q]:
            if t not in dist:
                dist[t] = dist[q] + 1
                parent[t] = q
                queue.append(t)
    return dist, parent


def scc_ids(nodes: Iterable[int], succ: Callable[[int], Iterable[int]]) -> dict[int, int]:
    """Iterative Tarjan; returns a component id for every node reached."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    comp: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp


def cyclic_nodes(nodes: Sequence[int], succ: Callable[[int], Iterable[int]]) -> set[int]:
    """Nodes lying on a cycle through themselves (nontrivial SCC or self-loop)."""
    comp = scc_ids(nodes, succ)
    size: dict[int, int] = {}
    for v, c in comp.items():
        size[c] = size.get(c, 0) + 1
    out = set()
    for v, c in comp.items():
        if size[c] > 1 or v in succ(v):
            out.add(v)
    return out


# --------------------------------------------------------------------------
# Optimal value and lasso values


def _union_successors(A: AcceptanceAutomaton) -> list[tuple[int, ...]]:
    out = []
    for row in A.delta:
        seen: dict[int, None] = {}
        for succ in row:
            for t in succ:
                seen.setdefault(t, None)
        out.append(tuple(seen))
    return out


def _edge_letter(A: AcceptanceAutomaton, q: int, t: int) -> int:
    for a, succ in enumerate(A.delta[q]):
        if t in succ:
            return a
    raise AssertionError("no letter for edge")


def _shortest_cycle(succ: Sequence[Sequence[int]], start: int, comp: dict, bound: int) -> Optional[list[int]]:
    """Shortest cycle through ``start`` of length at most ``bound`` (as a node list from start)."""
    if start in succ[start]:
        return [start]
    c = comp[start]
    parent = {start: None}
    depth = {start: 0}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        if depth[q] + 1 > bound:
            return None
        for t in succ[q]:
            if t == start:
                path = [q]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            if t not in parent and comp.get(t) == c:
                parent[t] = q
                depth[t] = depth[q] + 1
                queue.append(t)
    return None


def optimal_value(A: AcceptanceAutomaton) -> tuple[Fraction, LassoRun]:
    """Greatest value any word receives, together with a lasso run attaining it.

    The knot is a reachable state on a cycle with the greatest acceptance
    value. Ties go to the shortest reach path plus cycle, then to the lowest
    state index.
    """
    succ = _union_successors(A)
    dist, parent = _reachable(succ, A.initial)
    comp = scc_ids(list(dist), lambda q: succ[q])
    size: dict[int, int] = {}
    for c in comp.values():
        size[c] = size.get(c, 0) + 1
    knots = [q for q in dist if size[comp[q]] > 1 or q in succ[q]]
    best_value = max(A.acceptance[q] for q in knots)
    candidates = sorted((dist[q], q) for q in knots if A.acceptance[q] == best_value)

    best: Optional[tuple[int, int, list[int]]] = None
    for d, q in candidates:
        if best is not None and d + 1 > best[0]:
            break
        bound = len(comp) if best is None else best[0] - d
        cycle = _shortest_cycle(succ, q, comp, bound)
        if cycle is None:
            continue
        key = (d + len(cycle), q)
        if best is None or key < (best[0], best[1]):
            best = (key[0], q, cycle)
    assert best is not None
    _, knot, cycle = best

    reach = [knot]
    while parent[reach[-1]] is not None:
        reach.append(parent[reach[-1]])
    reach.reverse()
    prefix_states = reach[:-1]
    states = prefix_states + cycle + [knot]
    letters = [A.alphabet[_edge_letter(A, states[i], states[i + 1])] for i in range(len(states) - 1)]
    u = len(prefix_states)
    run = LassoRun(tuple(prefix_states), tuple(cycle), LassoWord(tuple(letters[:u]), tuple(letters[u:])))
    return best_value, run


def lasso_product(A: AcceptanceAutomaton, w: LassoWord) -> AcceptanceAutomaton:
    """Synchronized product of ``A`` with the lasso structure of ``w``."""
    N = len(w)
    letters = [A.letter_index(w.letter(p)) for p in range(N)]
    ids: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []
    rows: list[tuple] = []
    queue = deque()
    for q in A.initial:
        key = (q, 0)
        if key not in ids:
            ids[key] = len(order)
            order.append(key)
            queue.append(key)
    while queue:
        q, p = queue.popleft()
        np_ = w.next_pos(p)
        out = []
        for t in A.delta[q][letters[p]]:
            key = (t, np_)
            if key not in ids:
                ids[key] = len(order)
                order.append(key)
                queue.append(key)
            out.append(ids[key])
        rows.append(((*out,),))
    # rows were appended in discovery order, which equals id order
    return AcceptanceAutomaton(
        (BULLET,),
        rows,
        tuple(ids[(q, 0)] for q in dict.fromkeys(A.initial)),
        [A.acceptance[q] for q, _ in order],
        [f"({A.label(q)},{p})" for q, p in order],
    )


def lasso_value(A: AcceptanceAutomaton, w: LassoWord) -> Fraction:
    """Exact value of ``A`` on the ultimately periodic word ``w``."""
    N = len(w)
    letters = [A.letter_index(w.letter(p)) for p in range(N)]
    nxt = [w.next_pos(p) for p in range(N)]
    delta = A.delta
    seen: dict[int, None] = {}
    queue = deque()
    for q in A.initial:
        k = q * N
        if k not in seen:
            seen[k] = None
            queue.append(k)
    while queue:
        k = queue.popleft()
        q, p = divmod(k, N)
        np_ = nxt[p]
        for t in delta[q][letters[p]]:
            kk = t * N + np_
            if kk not in seen:
                seen[kk] = None
                queue.append(kk)

    def succ(k: int):
        q, p = divmod(k, N)
        np_ = nxt[p]
        return [t * N + np_ for t in delta[q][letters[p]]]

    # prefix positions are never revisited, so only cycle positions matter
    u = len(w.prefix)
    best = ZERO
    for k in cyclic_nodes([k for k in seen if k % N >= u], succ):
        v = A.acceptance[k // N]
        if v > best:
            best = v
    return best


# --------------------------------------------------------------------------
# Alternating automata on lassos


def alt_lasso_value(A: AlternatingAutomaton, w: LassoWord) -> Fraction:
    """Exact value of an alternating automaton on ``w``.

    Each candidate threshold ``c`` yields a Büchi game on (state, lasso
    position): Max picks a disjunct, Min picks one of its states or its
    value leaf. Max wins when every reached leaf is at least ``c`` and
    states with acceptance at least ``c`` recur. The answer is the largest
    threshold Max wins; the threshold test is monotone, so binary search
    over the sorted candidates suffices.
    """
    N = len(w)
    letters = [A.letter_index(w.letter(p)) for p in range(N)]
    nxt = [w.next_pos(p) for p in range(N)]

    # explore reachable (state, position) pairs ignoring thresholds
    ids: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []
    queue = deque()
    for q in A.initial:
        if (q, 0) not in ids:
            ids[(q, 0)] = len(order)
            order.append((q, 0))
            queue.append((q, 0))
    moves: list[list[tuple[tuple[int, ...], Fraction]]] = []
    while queue:
        q, p = queue.popleft()
        opts = []
        for states, v in A.delta[q][letters[p]]:
            targets = []
            for t in states:
                key = (t, nxt[p])
                if key not in ids:
                    ids[key] = len(order)
                    order.append(key)
                    queue.append(key)
                targets.append(ids[key])
            opts.append((tuple(targets), v))
        moves.append(opts)

    values = {A.acceptance[q] for q, _ in order}
    for opts in moves:
        values.update(v for _, v in opts)
    values.add(ZERO)
    cands = sorted(values)
    roots = [ids[(q, 0)] for q in A.initial]

    def wins(c: Fraction) -> bool:
        n = len(order)
        owner: list[int] = [MAX] * n
        succ: list[list[int]] = [[] for _ in range(n)]
        accepting = [A.acceptance[q] >= c for q, _ in order]
        win, lose = n, n + 1
        owner += [MAX, MAX]
        succ += [[win], [lose]]
        accepting += [True, False]
        for i, opts in enumerate(moves):
            for targets, v in opts:
                if v < c:
                    continue
                if not targets:
                    succ[i].append(win)
                    continue
                owner.append(MIN)
                succ.append(list(targets))
                accepting.append(False)
                succ[i].append(len(owner) - 1)
            if not succ[i]:
                succ[i].append(lose)
        region = solve_buchi(owner, succ, accepting)
        return any(region[r] for r in roots)

    lo, hi = 0, len(cands) - 1  # cands[lo] (zero) is always winnable
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if wins(cands[mid]):
            lo = mid
        else:
            hi = mid - 1
    return cands[lo]


# --------------------------------------------------------------------------
# Alternation removal


def dealternate(A: AlternatingAutomaton, prune: bool = True) -> AcceptanceAutomaton:
    """Language-equivalent nondeterministic automaton.

    A state is ``(Y, v, b)``: ``Y`` maps each pending branch state to the
    greatest acceptance value it has seen since the last exposure (copies of
    one state keep the smaller value), ``v`` is the least leaf value
    collected so far, and ``b`` is the exposure flag. Exposed states accept
    with ``min(v, min Y)``; unexposed ones accept with 0.

    With ``prune`` set, an exposed successor is generated only when it
    would expose a positive value, and a state with no pending branch is
    kept only in its best flag. Both omitted states are dominated by a kept
    sibling, so the language is unchanged.
    """
    # Values are replaced by their rank in the finite value set; ranks
    # compare like the values and hash much faster than Fractions.
    values = sorted(set(A.acceptance) | A.leaf_values() | {ZERO, ONE})
    rank = {x: i for i, x in enumerate(values)}
    F = [rank[x] for x in A.acceptance]
    top = rank[ONE]
    n_letters = len(A.alphabet)
    ids: dict[tuple, int] = {}
    order: list[tuple] = []
    rows: list[list[tuple[int, ...]]] = []
    queue = deque()

    def canon(Y: tuple, v: int, b: bool) -> tuple:
        if prune:
            if not Y:
                b = v > 0
            elif b and min(v, min(r for _, r in Y)) == 0:
                b = False
        return (Y, v, b)

    def intern(key: tuple) -> int:
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(order)
            order.append(key)
            queue.append(key)
        return i

    initial = [intern(canon(((q, F[q]),), top, False)) for q in dict.fromkeys(A.initial)]
    table = [
        [tuple((tuple(sorted(s)), rank[v]) for s, v in sorted(dnf, key=_disjunct_key)) for dnf in row]
        for row in A.delta
    ]
    while queue:
        Y, v, b = queue.popleft()
        row = []
        for a in range(n_letters):
            # Choose one disjunct per pending state, merging partial choices
            # that already agree so the product does not blow up.
            partial: dict[tuple, None] = {((), v): None}
            for q, r in Y:
                nxt: dict[tuple, None] = {}
                for states, u in table[q][a]:
                    if b:
                        add = [(t, F[t]) for t in states]
                    else:
                        add = [(t, r if r > F[t] else F[t]) for t in states]
                    for pY, pv in partial:
                        if add:
                            merged = dict(pY)
                            for t, val in add:
                                old = merged.get(t)
                                if old is None or val < old:
                                    merged[t] = val
                            key = tuple(sorted(merged.items()))
                        else:
                            key = pY
                        nxt[(key, u if u < pv else pv)] = None
                partial = nxt
            succ_keys: dict[tuple, None] = {}
            for pY, nv in partial:
                succ_keys[canon(pY, nv, False)] = None
                succ_keys[canon(pY, nv, True)] = None
            row.append(tuple(intern(k) for k in succ_keys))
        rows.append(row)

    acceptance = []
    labels = []
    for Y, v, b in order:
        acceptance.append(values[min([v, *(r for _, r in Y)])] if b else ZERO)
        ys = ",".join(f"{A.label(q)}:{format_rat(values[r])}" for q, r in Y)
        labels.append(f"({{{ys}}},{format_rat(values[v])},{'tt' if b else 'ff'})")
    return AcceptanceAutomaton(A.alphabet, rows, initial, acceptance, labels)


def _disjunct_key(d: Disjunct):
    return (sorted(d[0]), d[1])


# --------------------------------------------------------------------------
# Monotone operators on nondeterministic automata


def apply_quality_op(
    op: QualityOp | Callable[..., Fraction],
    As: Sequence[AcceptanceAutomaton],
    prune: bool = True,
) -> AcceptanceAutomaton:
    """Automaton for the pointwise image ``f(L(A_1), ..., L(A_k))``.

    Each component carries a register holding the greatest acceptance value
    seen since the last exposure; an exposed state accepts with ``f`` of the
    registers. ``op`` must be monotone in every argument.
    """
    if not As:
        raise AutomatonError("at least one automaton is required")
    if isinstance(op, QualityOp):
        if op.arity != len(As):
            raise AutomatonError(f"{op.name} expects {op.arity} automata, got {len(As)}")
        if not op.monotone:
            raise AutomatonError(f"{op.name} is not monotone")
        f = op.fn
    else:
        f = op
    alphabet = As[0].alphabet
    for B in As[1:]:
        if set(B.alphabet) != set(alphabet):
            raise AutomatonError("automata have different alphabets")
    letter_maps = [[B.letter_index(a) for a in alphabet] for B in As]
    k = len(As)

    ids: dict[tuple, int] = {}
    order: list[tuple] = []
    rows: list[list[tuple[int, ...]]] = []
    queue = deque()

    def intern(key: tuple) -> int:
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(order)
            order.append(key)
            queue.append(key)
        return i

    def exposed(regs) -> Fraction:
        return f(*regs)

    initial = [
        intern((tuple(qs), (ZERO,) * k, False))
        for qs in itertools.product(*(dict.fromkeys(B.initial) for B in As))
    ]
    while queue:
        qs, regs, b = queue.popleft()
        row = []
        for a in range(len(alphabet)):
            succs = [As[i].delta[qs[i]][letter_maps[i][a]] for i in range(k)]
            out: dict[tuple, None] = {}
            for ts in itertools.product(*succs):
                if b:
                    nr = tuple(As[i].acceptance[t] for i, t in enumerate(ts))
                else:
                    nr = tuple(max(regs[i], As[i].acceptance[t]) for i, t in enumerate(ts))
                out[(ts, nr, False)] = None
                if not prune or exposed(nr) > 0:
                    out[(ts, nr, True)] = None
            row.append(tuple(intern(key) for key in out))
        rows.append(row)

    acceptance = [exposed(regs) if b else ZERO for _, regs, b in order]
    labels = [
        "(" + ",".join(f"{As[i].label(q)}:{format_rat(r)}" for i, (q, r) in enumerate(zip(qs, regs)))
        + f",{'tt' if b else 'ff'})"
        for qs, regs, b in order
    ]
    return AcceptanceAutomaton(alphabet, rows, initial, acceptance, labels)


# --------------------------------------------------------------------------
# Export


def letter_to_json(a: Letter):
    if isinstance(a, frozenset):
        return sorted(a)
    return a


def letter_from_json(x) -> Letter:
    if isinstance(x, list):
        return frozenset(x)
    return x


def letter_str(a: Letter) -> str:
    if isinstance(a, frozenset):
        return "{" + ",".join(sorted(a)) + "}"
    return str(a)


def automaton_to_dict(A: AcceptanceAutomaton | AlternatingAutomaton) -> dict:
    alternating = isinstance(A, AlternatingAutomaton)
    transitions = []
    for q, row in enumerate(A.delta):
        for a, entry in enumerate(row):
            if alternating:
                dnf = [
                    {"states": sorted(s), "value": format_rat(v)}
                    for s, v in sorted(entry, key=_disjunct_key)
                ]
            else:
                dnf = [{"states": [t], "value": "1"} for t in entry]
            transitions.append({"src": q, "letter": a, "dnf": dnf})
    return {
        "kind": "alternating" if alternating else "nondeterministic",
        "alphabet": [letter_to_json(a) for a in A.alphabet],
        "states": [
            {"id": q, "label": A.label(q), "acceptance": format_rat(A.acceptance[q])}
            for q in range(A.n_states)
        ],
        "initial": list(A.initial),
        "transitions": transitions,
    }


def automaton_from_dict(data: dict) -> AcceptanceAutomaton | AlternatingAutomaton:
    """Inverse of :func:`automaton_to_dict`.

    Letters may be referenced by index or by value. A file whose every
    disjunct is a single state with value 1 is read as nondeterministic
    unless ``kind`` says otherwise.
    """
    try:
        alphabet = [letter_from_json(x) for x in data["alphabet"]]
        states = data["states"]
        id_map = {s["id"]: i for i, s in enumerate(states)}
        if len(id_map) != len(states):
            raise AutomatonError("duplicate state ids")
        acceptance = [parse_rat(str(s.get("acceptance", "0"))) for s in states]
        labels = [str(s.get("label", s["id"])) for s in states]
        initial = [id_map[i] for i in data["initial"]]
        letter_ids = {}
        for i, a in enumerate(alphabet):
            letter_ids[a] = i
        n, m = len(states), len(alphabet)
        table: list[list[set]] = [[set() for _ in range(m)] for _ in range(n)]
        for tr in data["transitions"]:
            src = id_map[tr["src"]]
            letter = tr["letter"]
            if isinstance(letter, int) and not isinstance(letter, bool):
                a = letter
                if not 0 <= a < m:
                    raise AutomatonError(f"letter index {a} out of range")
            else:
                a = letter_ids[letter_from_json(letter)]
            for disj in tr["dnf"]:
                ss = frozenset(id_map[t] for t in disj.get("states", []))
                table[src][a].add((ss, parse_rat(str(disj.get("value", "1")))))
    except KeyError as exc:
        raise AutomatonError(f"missing or unknown field {exc}") from None
    kind = data.get("kind")
    if kind is None:
        kind = "nondeterministic" if all(
            len(s) == 1 and v == ONE for row in table for e in row for s, v in e
        ) else "alternating"
    if kind == "nondeterministic":
        delta = []
        for row in table:
            r = []
            for entry in row:
                if any(len(s) != 1 or v != ONE for s, v in entry):
                    raise AutomatonError("nondeterministic automata need single-state disjuncts with value 1")
                r.append(tuple(sorted(next(iter(s)) for s, _ in entry)))
            delta.append(r)
        return AcceptanceAutomaton(alphabet, delta, initial, acceptance, labels)
    if kind != "alternating":
        raise AutomatonError(f"unknown automaton kind {kind!r}")
    return AlternatingAutomaton(alphabet, [[frozenset(e) for e in row] for row in table], initial, acceptance, labels)


def automaton_to_json(A, indent: Optional[int] = 2) -> str:
    return json.dumps(automaton_to_dict(A), indent=indent, ensure_ascii=False)


def automaton_from_json(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AutomatonError(f"invalid JSON: {exc}") from None
    return automaton_from_dict(data)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def automaton_to_dot(A: AcceptanceAutomaton | AlternatingAutomaton) -> str:
    """Graphviz rendering: acceptance values annotate nodes, leaves are boxes."""
    alternating = isinstance(A, AlternatingAutomaton)
    lines = ["digraph automaton {", "  rankdir=LR;", '  node [shape=ellipse];']
    for q in range(A.n_states):
        lines.append(f'  q{q} [label="{_dot_escape(A.label(q))}\\nF={format_rat(A.acceptance[q])}"];')
    for i, q in enumerate(A.initial):
        lines.append(f'  init{i} [shape=point]; init{i} -> q{q};')
    leaves: dict[Fraction, str] = {}
    n_junctions = 0
    for q, row in enumerate(A.delta):
        for a, entry in enumerate(row):
            lab = _dot_escape(letter_str(A.alphabet[a]))
            if not alternating:
                for t in entry:
                    lines.append(f'  q{q} -> q{t} [label="{lab}"];')
                continue
            for states, v in sorted(entry, key=_disjunct_key):
                targets = [f"q{t}" for t in sorted(states)]
                if v != ONE or not states:
                    if v not in leaves:
                        leaves[v] = f"leaf{len(leaves)}"
                        lines.append(f'  {leaves[v]} [shape=box,label="{format_rat(v)}"];')
                    targets.append(leaves[v])
                if len(targets) == 1:
                    lines.append(f'  q{q} -> {targets[0]} [label="{lab}"];')
                else:
                    j = f"and{n_junctions}"
                    n_junctions += 1
                    lines.append(f'  {j} [shape=point];')
                    lines.append(f'  q{q} -> {j} [label="{lab}",arrowhead=none];')
                    for t in targets:
                        lines.append(f"  {j} -> {t};")
    lines.append("}")
    return "\n".join(lines) + "\n"
