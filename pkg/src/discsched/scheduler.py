"""Kripke structures, the automaton product, and near-optimal path search.

``eval_path`` is the exact semantics on lassos. It shares no code with the
automata pipeline, which makes it the reference the pipeline is tested
against.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import formula as fm
from .automata import BULLET, AcceptanceAutomaton, LassoWord, dealternate, optimal_value
from .translate import translate
from .values import ONE, ZERO, check_margin, format_rat


class KripkeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KripkeStructure:
    """A finite labelled transition system with a left-total relation.

    ``init`` is empty when paths may start anywhere.
    """

    aps: tuple[str, ...]
    states: tuple[str, ...]
    labels: Mapping[str, frozenset]
    edges: Mapping[str, tuple[str, ...]]
    init: tuple[str, ...] = ()
    _index: dict = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "aps", tuple(self.aps))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "labels", {s: frozenset(self.labels.get(s, ())) for s in self.states})
        object.__setattr__(self, "edges", {s: tuple(dict.fromkeys(self.edges.get(s, ()))) for s in self.states})
        object.__setattr__(self, "init", tuple(self.init))
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})
        self.validate()

    def validate(self) -> None:
        if not self.states:
            raise KripkeError("a Kripke structure needs at least one state")
        if len(self._index) != len(self.states):
            raise KripkeError("duplicate state names")
        if len(set(self.aps)) != len(self.aps):
            raise KripkeError("duplicate atomic propositions")
        known = set(self.aps)
        for s in self.states:
            extra = self.labels[s] - known
            if extra:
                raise KripkeError(f"state {s} is labelled with undeclared propositions {sorted(extra)}")
            if not self.edges[s]:
                raise KripkeError(f"state {s} has no outgoing edge")
            for t in self.edges[s]:
                if t not in self._index:
                    raise KripkeError(f"edge {s} -> {t} targets an unknown state")
        for s in self.init:
            if s not in self._index:
                raise KripkeError(f"initial state {s} is unknown")

    def index(self, s: str) -> int:
        return self._index[s]

    def __contains__(self, s: str) -> bool:
        return s in self._index

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.edges.values())


@dataclass(frozen=True)
class LassoPath:
    """The state path ``prefix . cycle^omega``."""

    prefix: tuple[str, ...]
    cycle: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise ValueError("the cycle of a lasso path must be nonempty")

    def validate(self, K: KripkeStructure) -> None:
        seq = list(self.prefix) + list(self.cycle) + [self.cycle[0]]
        for s in seq:
            if s not in K:
                raise KripkeError(f"path visits unknown state {s}")
        for s, t in zip(seq, seq[1:]):
            if t not in K.edges[s]:
                raise KripkeError(f"path uses missing edge {s} -> {t}")
        if self.prefix and K.init and self.prefix[0] not in K.init:
            raise KripkeError(f"path starts in non-initial state {self.prefix[0]}")
        if not self.prefix and K.init and self.cycle[0] not in K.init:
            raise KripkeError(f"path starts in non-initial state {self.cycle[0]}")

    def canonical(self) -> "LassoPath":
        """Shortest representation of the same infinite path."""
        w = LassoWord(self.prefix, self.cycle).canonical()
        return LassoPath(w.prefix, w.cycle)

    def word(self, K: KripkeStructure) -> LassoWord:
        return LassoWord([K.labels[s] for s in self.prefix], [K.labels[s] for s in self.cycle])

    def __str__(self) -> str:
        return " ".join(self.prefix) + " ; " + " ".join(self.cycle)


def parse_path(text: str) -> LassoPath:
    """Parse ``"s0 s0 ; s1"`` (prefix, semicolon, cycle)."""
    if text.count(";") != 1:
        raise ValueError("a path needs exactly one ';' separating prefix and cycle")
    u, v = text.split(";")
    return LassoPath(tuple(u.split()), tuple(v.split()))


def parse_word(text: str) -> LassoWord:
    """Parse ``"{} {p} ; {p,q}"`` into a lasso word over sets of propositions."""
    if text.count(";") != 1:
        raise ValueError("a word needs exactly one ';' separating prefix and cycle")

    def letters(part: str) -> list[frozenset]:
        out = []
        for m in re.finditer(r"\{([^{}]*)\}|(\S+)", part):
            if m.group(2) is not None:
                raise ValueError(f"letters must be written as {{...}}, got {m.group(2)!r}")
            out.append(frozenset(x.strip() for x in m.group(1).split(",") if x.strip()))
        return out

    u, v = text.split(";")
    return LassoWord(letters(u), letters(v))


# --------------------------------------------------------------------------
# File formats


def parse_kts(text: str) -> KripkeStructure:
    """Read the line-oriented format (``aps``, ``state``, ``edge``, ``init``).

    ``#`` starts a comment. Unknown directives are errors.
    """
    aps: Optional[list[str]] = None
    states: list[str] = []
    labels: dict[str, frozenset] = {}
    edges: dict[str, list[str]] = {}
    init: list[str] = []
    name = r"[A-Za-z0-9_.\-]+"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "aps":
            if aps is not None:
                raise KripkeError(f"line {lineno}: duplicate aps directive")
            aps = rest.split()
        elif head == "state":
            m = re.fullmatch(rf"({name})\s*(?:\{{([^{{}}]*)\}})?", rest)
            if not m:
                raise KripkeError(f"line {lineno}: expected 'state NAME {{p,q}}'")
            s = m.group(1)
            if s in labels:
                raise KripkeError(f"line {lineno}: state {s} declared twice")
            states.append(s)
            labels[s] = frozenset(x.strip() for x in (m.group(2) or "").split(",") if x.strip())
        elif head == "edge":
            parts = rest.split()
            if len(parts) != 2:
                raise KripkeError(f"line {lineno}: expected 'edge SRC DST'")
            edges.setdefault(parts[0], []).append(parts[1])
        elif head == "init":
            parts = rest.split()
            if not parts:
                raise KripkeError(f"line {lineno}: expected 'init NAME'")
            init.extend(parts)
        else:
            raise KripkeError(f"line {lineno}: unknown directive {head!r}")
    if aps is None:
        aps = sorted(set().union(*labels.values())) if labels else []
    for s in edges:
        if s not in labels:
            raise KripkeError(f"edge from undeclared state {s}")
    return KripkeStructure(tuple(aps), tuple(states), labels, {s: tuple(t) for s, t in edges.items()}, tuple(init))


def kripke_to_kts(K: KripkeStructure) -> str:
    lines = ["aps " + " ".join(K.aps)]
    for s in K.states:
        lines.append(f"state {s} {{{','.join(sorted(K.labels[s]))}}}")
    for s in K.states:
        for t in K.edges[s]:
            lines.append(f"edge {s} {t}")
    for s in K.init:
        lines.append(f"init {s}")
    return "\n".join(lines) + "\n"


def kripke_to_dict(K: KripkeStructure) -> dict:
    return {
        "aps": list(K.aps),
        "states": [{"id": s, "label": sorted(K.labels[s])} for s in K.states],
        "edges": [[s, t] for s in K.states for t in K.edges[s]],
        "init": list(K.init),
    }


def kripke_from_dict(data: dict) -> KripkeStructure:
    try:
        states = [str(s["id"]) for s in data["states"]]
        labels = {str(s["id"]): frozenset(s.get("label", [])) for s in data["states"]}
        edges: dict[str, list[str]] = {}
        for src, dst in data["edges"]:
            edges.setdefault(str(src), []).append(str(dst))
        aps = data.get("aps")
        if aps is None:
            aps = sorted(set().union(*labels.values()))
        return KripkeStructure(tuple(aps), tuple(states), labels, edges, tuple(data.get("init", ())))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, KripkeError):
            raise
        raise KripkeError(f"malformed Kripke JSON: {exc}") from None


def load_kripke(path: str) -> KripkeStructure:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise KripkeError(f"invalid JSON: {exc}") from None
        return kripke_from_dict(data)
    return parse_kts(text)


# --------------------------------------------------------------------------
# Product and scheduling


def _automaton_aps(A: AcceptanceAutomaton) -> frozenset:
    out: set = set()
    for a in A.alphabet:
        if not isinstance(a, frozenset):
            raise KripkeError("automaton letters must be sets of atomic propositions")
        out |= a
    return frozenset(out)


def product_with_pairs(A: AcceptanceAutomaton, K: KripkeStructure) -> tuple[AcceptanceAutomaton, list[tuple[int, str]]]:
    """Product automaton over a one-letter alphabet, plus the (q, s) pair of every state.

    Kripke labels are projected onto the propositions the automaton reads.
    Only the part reachable from the initial pairs is built.
    """
    aps = _automaton_aps(A)
    missing = aps - set(K.aps)
    if missing:
        raise KripkeError(f"automaton reads propositions unknown to the structure: {sorted(missing)}")
    letter_of = {}
    for s in K.states:
        letter_of[s] = A.letter_index(K.labels[s] & aps)
    starts = K.init if K.init else K.states
    ids: dict[tuple[int, str], int] = {}
    pairs: list[tuple[int, str]] = []
    rows: list = []
    queue = deque()

    def intern(key) -> int:
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(pairs)
            pairs.append(key)
            queue.append(key)
        return i

    initial = [intern((q, s)) for q in dict.fromkeys(A.initial) for s in starts]
    while queue:
        q, s = queue.popleft()
        succ = A.delta[q][letter_of[s]]
        rows.append(((*(intern((t, s2)) for t in succ for s2 in K.edges[s]),),))
    P = AcceptanceAutomaton(
        (BULLET,),
        rows,
        initial,
        [A.acceptance[q] for q, _ in pairs],
        [f"({A.label(q)},{s})" for q, s in pairs],
    )
    return P, pairs


def product(A: AcceptanceAutomaton, K: KripkeStructure) -> AcceptanceAutomaton:
    return product_with_pairs(A, K)[0]


@dataclass(frozen=True)
class ScheduleResult:
    path: LassoPath
    guaranteed_lb: Fraction
    sup_interval: tuple[Fraction, Fraction]
    exact_value: Fraction
    eps: Fraction
    stats: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "path": {"prefix": list(self.path.prefix), "cycle": list(self.path.cycle)},
            "guaranteed_lb": format_rat(self.guaranteed_lb),
            "sup_interval": [format_rat(self.sup_interval[0]), format_rat(self.sup_interval[1])],
            "exact_value": format_rat(self.exact_value),
            "eps": format_rat(self.eps),
            "stats": dict(self.stats),
        }


def schedule(K: KripkeStructure, phi: fm.Formula, eps) -> ScheduleResult:
    """Find a lasso path whose value is within ``eps`` of the best any path achieves.

    The automaton optimum ``m`` is a certified lower bound on the returned
    path's value, and the supremum over all paths lies in ``[m, m + eps]``.
    """
    eps = check_margin(eps)
    aps = fm.atoms(phi)
    missing = set(aps) - set(K.aps)
    if missing:
        raise KripkeError(f"formula uses propositions unknown to the structure: {sorted(missing)}")
    A = translate(phi, eps, aps)
    N = dealternate(A)
    P, pairs = product_with_pairs(N, K)
    m, run = optimal_value(P)
    path = LassoPath(tuple(pairs[x][1] for x in run.prefix), tuple(pairs[x][1] for x in run.cycle)).canonical()
    path.validate(K)
    exact = eval_path(path, phi, K)
    if exact < m:
        raise AssertionError(f"path value {exact} below the certified bound {m}")
    stats = {
        "alternating_states": A.n_states,
        "nondeterministic_states": N.n_states,
        "product_states": P.n_states,
        "formula_size": fm.formula_size(phi),
    }
    return ScheduleResult(path, m, (m, min(m + eps, ONE)), exact, eps, stats)


# --------------------------------------------------------------------------
# Exact semantics on lassos


def eval_path(
    xi: Union[LassoPath, LassoWord],
    phi: fm.Formula,
    K: Optional[KripkeStructure] = None,
) -> Fraction:
    """Exact truth value of ``phi`` at position 0 of an ultimately periodic path or word."""
    if isinstance(xi, LassoPath):
        if K is None:
            raise ValueError("a Kripke structure is needed to read the labels of a path")
        xi.validate(K)
        xi = xi.word(K)
    return _Evaluator(xi).values(phi)[0]


class _Evaluator:
    def __init__(self, w: LassoWord):
        self.n = len(w)
        self.u = len(w.prefix)
        self.letters = [w.letter(p) for p in range(self.n)]
        self.nxt = [w.next_pos(p) for p in range(self.n)]
        self.memo: dict[fm.Formula, list[Fraction]] = {}

    def values(self, phi: fm.Formula) -> list[Fraction]:
        out = self.memo.get(phi)
        if out is None:
            out = self.memo[phi] = self._compute(phi)
        return out

    def _compute(self, phi: fm.Formula) -> list[Fraction]:
        n = self.n
        if isinstance(phi, fm.TrueF):
            return [ONE] * n
        if isinstance(phi, fm.Atom):
            return [ONE if phi.name in a else ZERO for a in self.letters]
        if isinstance(phi, fm.Not):
            return [1 - x for x in self.values(phi.arg)]
        if isinstance(phi, fm.And):
            a, b = self.values(phi.left), self.values(phi.right)
            return [min(x, y) for x, y in zip(a, b)]
        if isinstance(phi, fm.Next):
            a = self.values(phi.arg)
            return [a[self.nxt[i]] for i in range(n)]
        if isinstance(phi, fm.Apply):
            cols = [self.values(x) for x in phi.args]
            return [fm.eval_quality_op(phi.op, [c[i] for c in cols]) for i in range(n)]
        if isinstance(phi, fm.Until):
            return self._until(self.values(phi.left), self.values(phi.right))
        if isinstance(phi, fm.UntilDisc):
            return self._until_disc(phi.eta, self.values(phi.left), self.values(phi.right))
        raise TypeError(f"not a formula: {phi!r}")

    def _until(self, a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
        # after n steps every position of the cycle has entered the running
        # min, so later terms repeat earlier ones with a smaller running min
        out = []
        for i in range(self.n):
            best, run, p = ZERO, ONE, i
            for _ in range(self.n + 1):
                best = max(best, min(b[p], run))
                run = min(run, a[p])
                if run <= best:
                    break
                p = self.nxt[p]
            out.append(best)
        return out

    def _until_disc(self, eta, a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
        cycle_dead = all(b[p] == 0 for p in range(self.u, self.n))
        out = []
        for i in range(self.n):
            best, run, p, k = ZERO, ONE, i, 0
            while True:
                w = eta.value(k)
                if w <= best or run == 0 or (k >= self.n and cycle_dead):
                    break
                best = max(best, min(w * b[p], run))
                run = min(run, w * a[p])
                p = self.nxt[p]
                k += 1
            out.append(best)
        return out


def all_lasso_paths(K: KripkeStructure, max_prefix: int, max_cycle: int) -> Iterable[LassoPath]:
    """Every lasso path with bounded prefix and cycle lengths (the cycle is a closed walk)."""
    starts = K.init if K.init else K.states

    def walks(s: str, length: int):
        if length == 1:
            yield (s,)
            return
        for w in walks(s, length - 1):
            for t in K.edges[w[-1]]:
                yield w + (t,)

    for s0 in starts:
        for lu in range(max_prefix + 1):
            for pre in walks(s0, lu + 1):
                u, c0 = pre[:-1], pre[-1]
                for lv in range(1, max_cycle + 1):
                    for cyc in walks(c0, lv):
                        if cyc[0] in K.edges[cyc[-1]]:
                            yield LassoPath(u, cyc)
