"""Compilation of discounted LTL formulas into alternating automata.

A state is a formula paired with a discount sequence (and the margin it is
translated for). Transitions are computed by structural recursion: only
``X`` and the self-reference of an until introduce state atoms, everything
else is substituted in place. Discounted untils are cut off at their event
horizon, which keeps the state space finite.

A quality operator node at a positive position is realized as a
synchronized product of its argument automata. Each product component is
either a live state of an argument automaton or a value leaf that component
has already reached. Components that are still live carry registers with
the greatest acceptance value seen since the last exposure, as in
:func:`discsched.automata.apply_quality_op`, but the product is taken
directly over the alternating argument automata. At negative positions the
operator is first dualized and pushed through the negation.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import formula as fm
from .automata import (
    AlternatingAutomaton,
    Dnf,
    dnf_leaf,
    dnf_state,
    drop_leaf_dominated,
    letter_str,
    merge_dnf,
    simplify_dnf,
)
from .formula import Apply, Formula, QualityOp, dualize_quality_op, margin_transfer
from .values import ONE, ZERO, DiscountSeq, check_margin, event_horizon, format_rat

UNIT = DiscountSeq.unit()

NORMALIZATIONS = ("merge", "absorb")


def powerset_alphabet(aps: tuple[str, ...]) -> tuple[frozenset, ...]:
    """All subsets of ``aps``, ordered by their bitmask."""
    out = []
    for mask in range(1 << len(aps)):
        out.append(frozenset(p for i, p in enumerate(aps) if mask >> i & 1))
    return tuple(out)


@dataclass(frozen=True)
class _OpNode:
    """The monotone function ``x -> seq.act(op(x))`` used by a product."""

    op: QualityOp
    seq: DiscountSeq

    def __call__(self, xs) -> Fraction:
        return self.seq.act(self.op.fn(*xs))

    def label(self) -> str:
        if self.seq == UNIT:
            return self.op.label()
        return f"{self.seq}*{self.op.label()}"


class Translator:
    """Builds the reachable part of the automaton for one formula.

    Internal states are small integers handed out on first sight. A key is
    either ``("f", psi, seq, eps)`` for a formula state or
    ``("p", node, comps, regs, flag)`` for a product state; in the latter,
    ``comps`` holds state ids for live components and Fractions for
    components that ended in a leaf.

    ``normalize`` picks how transition formulas are cleaned up. ``"merge"``
    only folds disjuncts over the same state set and lets a pure value leaf
    swallow weaker disjuncts in products. ``"absorb"`` applies full
    subsumption everywhere, which gives fewer states. Both are exact.
    """

    def __init__(self, aps: tuple[str, ...], prune: bool = True, normalize: str = "merge"):
        if normalize not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {normalize!r}")
        self.aps = aps
        self.alphabet = powerset_alphabet(aps)
        self.prune = prune
        self.normalize = normalize
        if normalize == "absorb":
            self._clean, self._clean_product = simplify_dnf, simplify_dnf
        else:
            self._clean, self._clean_product = merge_dnf, drop_leaf_dominated
        self.keys: list[tuple] = []
        self.ids: dict[tuple, int] = {}
        self._acc: list[Fraction] = []
        self._state_memo: dict[tuple[int, int], Dnf] = {}
        self._formula_memo: dict[tuple, Dnf] = {}

    # -- states

    def intern(self, key: tuple) -> int:
        i = self.ids.get(key)
        if i is None:
            i = self.ids[key] = len(self.keys)
            self.keys.append(key)
            self._acc.append(self._compute_acceptance(key))
        return i

    def formula_state(self, psi: Formula, seq: DiscountSeq, eps: Fraction) -> int:
        return self.intern(("f", psi, seq, eps))

    def acceptance(self, i: int) -> Fraction:
        return self._acc[i]

    def _compute_acceptance(self, key: tuple) -> Fraction:
        if key[0] == "f":
            _, psi, seq, _ = key
            return ONE if isinstance(psi, fm.Until) and not seq.odd else ZERO
        _, node, comps, regs, flag = key
        live = [i for i, c in enumerate(comps) if not isinstance(c, Fraction)]
        if len(live) <= 1:
            xs = [c if isinstance(c, Fraction) else self._acc[c] for c in comps]
            return node(xs)
        if not flag:
            return ZERO
        return node([c if isinstance(c, Fraction) else r for c, r in zip(comps, regs)])

    def label(self, i: int) -> str:
        key = self.keys[i]
        if key[0] == "f":
            _, psi, seq, eps = key
            return f"({fm.pretty(psi)}, {seq})"
        _, node, comps, regs, flag = key
        parts = []
        for j, c in enumerate(comps):
            if isinstance(c, Fraction):
                parts.append(format_rat(c))
            elif regs is not None:
                parts.append(f"#{c}:{format_rat(regs[j])}")
            else:
                parts.append(f"#{c}")
        tail = "" if regs is None else (",tt" if flag else ",ff")
        return f"{node.label()}[{' '.join(parts)}{tail}]"

    # -- transitions

    def _or(self, a: Dnf, b: Dnf) -> Dnf:
        return self._clean(a | b)

    def _and(self, a: Dnf, b: Dnf) -> Dnf:
        return self._clean(frozenset((sa | sb, min(va, vb)) for sa, va in a for sb, vb in b))

    def delta(self, i: int, a: int) -> Dnf:
        memo = self._state_memo.get((i, a))
        if memo is not None:
            return memo
        key = self.keys[i]
        if key[0] == "f":
            _, psi, seq, eps = key
            out = self.delta_formula(psi, seq, eps, a)
        else:
            out = self._delta_product(key, a)
        self._state_memo[(i, a)] = out
        return out

    def delta_formula(self, psi: Formula, seq: DiscountSeq, eps: Fraction, a: int) -> Dnf:
        mkey = (psi, seq, eps, a)
        out = self._formula_memo.get(mkey)
        if out is None:
            out = self._formula_memo[mkey] = self._delta_formula(psi, seq, eps, a)
        return out

    def _delta_formula(self, psi: Formula, seq: DiscountSeq, eps: Fraction, a: int) -> Dnf:
        odd = seq.odd
        if isinstance(psi, fm.TrueF):
            return dnf_leaf(seq.act(ONE))
        if isinstance(psi, fm.Atom):
            return dnf_leaf(seq.act(ONE if psi.name in self.alphabet[a] else ZERO))
        if isinstance(psi, fm.Not):
            return self.delta_formula(psi.arg, seq.append(ONE), eps, a)
        if isinstance(psi, fm.And):
            left = self.delta_formula(psi.left, seq, eps, a)
            right = self.delta_formula(psi.right, seq, eps, a)
            return self._and(left, right) if odd else self._or(left, right)
        if isinstance(psi, fm.Next):
            return dnf_state(self.formula_state(psi.arg, seq, eps))
        if isinstance(psi, fm.Until):
            left = self.delta_formula(psi.left, seq, eps, a)
            right = self.delta_formula(psi.right, seq, eps, a)
            me = dnf_state(self.formula_state(psi, seq, eps))
            if odd:
                return self._or(right, self._and(left, me))
            return self._and(right, self._or(left, me))
        if isinstance(psi, fm.UntilDisc):
            eta0 = psi.eta.value(0)
            if eta0 * seq.product() <= eps:
                return dnf_leaf(seq.act(ZERO) if odd else seq.act(eta0))
            inner = seq.odot(eta0)
            left = self.delta_formula(psi.left, inner, eps, a)
            right = self.delta_formula(psi.right, inner, eps, a)
            rest = fm.UntilDisc(psi.eta.shifted(), psi.left, psi.right)
            me = dnf_state(self.formula_state(rest, seq, eps))
            if odd:
                return self._or(right, self._and(left, me))
            return self._and(right, self._or(left, me))
        if isinstance(psi, Apply):
            return self._delta_apply(psi, seq, eps, a)
        raise TypeError(f"not a formula node: {psi!r}")

    def _delta_apply(self, psi: Apply, seq: DiscountSeq, eps: Fraction, a: int) -> Dnf:
        op, args = psi.op, psi.args
        if not seq.odd:
            dual = dualize_quality_op(op, seq.entries[-1])
            return self.delta_formula(Apply(dual, tuple(fm.Not(x) for x in args)), seq.drop_last(), eps, a)
        inner_eps = margin_transfer(op, eps / seq.product())
        comps = tuple(self.formula_state(x, UNIT, inner_eps) for x in args)
        regs = (ZERO,) * len(comps) if len(comps) > 1 else None
        start = ("p", _OpNode(op, seq), comps, regs, False)
        return self._delta_product(start, a)

    def _delta_product(self, key: tuple, a: int) -> Dnf:
        _, node, comps, regs, flag = key
        live = [j for j, c in enumerate(comps) if not isinstance(c, Fraction)]
        per_comp = [sorted(self.delta(comps[j], a), key=_disjunct_order) for j in live]
        disjuncts: set = set()
        for choice in itertools.product(*per_comp):
            options: list[list] = []
            picked = dict(zip(live, choice))
            for j, c in enumerate(comps):
                if j not in picked:
                    options.append([c])
                    continue
                states, u = picked[j]
                opts: list = sorted(states)
                if not states or u < ONE:
                    opts.append(u)
                options.append(opts)
            tuples = list(itertools.product(*options))
            for exposed in (False, True):
                atoms: set[int] = set()
                value = ONE
                for t in tuples:
                    if all(isinstance(x, Fraction) for x in t):
                        value = min(value, node(t))
                    else:
                        atoms.add(self._product_successor(node, t, regs, flag, exposed))
                disjuncts.add((frozenset(atoms), value))
        return self._clean_product(disjuncts)

    def _product_successor(self, node: _OpNode, comps: tuple, regs, flag: bool, exposed: bool) -> int:
        live = [j for j, c in enumerate(comps) if not isinstance(c, Fraction)]
        if len(live) <= 1:
            return self.intern(("p", node, comps, None, False))
        new_regs = []
        for j, c in enumerate(comps):
            if isinstance(c, Fraction):
                new_regs.append(c)
                continue
            f = self._acc[c]
            new_regs.append(f if flag or regs is None else max(regs[j], f))
        new_regs = tuple(new_regs)
        if exposed and self.prune and node(new_regs) == 0:
            exposed = False
        return self.intern(("p", node, comps, new_regs, exposed))


def _disjunct_order(d):
    return (sorted(d[0]), d[1])


@dataclass
class Translation:
    """An automaton together with the translator that produced it."""

    automaton: AlternatingAutomaton
    translator: Translator
    state_ids: tuple[int, ...]

    def key(self, q: int) -> tuple:
        return self.translator.keys[self.state_ids[q]]


def translate_full(
    phi: Formula,
    eps,
    aps: Optional[tuple[str, ...]] = None,
    prune: bool = True,
    normalize: str = "merge",
) -> Translation:
    eps = check_margin(eps)
    if aps is None:
        aps = fm.atoms(phi)
    else:
        missing = set(fm.atoms(phi)) - set(aps)
        if missing:
            raise ValueError(f"formula uses propositions not in the alphabet: {sorted(missing)}")
        aps = tuple(aps)
    tr = Translator(aps, prune=prune, normalize=normalize)
    root = tr.formula_state(phi, UNIT, eps)
    order = [root]
    local = {root: 0}
    rows = []
    queue = deque([root])
    while queue:
        i = queue.popleft()
        row = []
        for a in range(len(tr.alphabet)):
            dnf = tr.delta(i, a)
            renamed = set()
            for states, v in dnf:
                ss = []
                for t in states:
                    if t not in local:
                        local[t] = len(order)
                        order.append(t)
                        queue.append(t)
                    ss.append(local[t])
                renamed.add((frozenset(ss), v))
            row.append(frozenset(renamed))
        rows.append(row)
    A = AlternatingAutomaton(
        tr.alphabet,
        rows,
        (0,),
        [tr.acceptance(i) for i in order],
        [tr.label(i) for i in order],
    )
    return Translation(A, tr, tuple(order))


def translate(
    phi: Formula, eps, aps: Optional[tuple[str, ...]] = None, normalize: str = "merge"
) -> AlternatingAutomaton:
    """Alternating automaton whose value on every word is within ``eps`` below the formula's."""
    return translate_full(phi, eps, aps, normalize=normalize).automaton


def sanity_boolean(phi: Formula, aps: Optional[tuple[str, ...]] = None) -> AlternatingAutomaton:
    """Translate a discount-free formula and check that only Boolean values occur."""
    if not fm.is_discount_free(phi):
        raise ValueError("formula contains discounted untils or quality operators")
    A = translate(phi, Fraction(1, 2), aps)
    bad = A.leaf_values() - {ZERO, ONE}
    if bad or any(x not in (ZERO, ONE) for x in A.acceptance):
        raise AssertionError("discount-free translation produced non-Boolean values")
    return A


def describe(A: AlternatingAutomaton) -> str:
    """Human-readable transition listing."""
    from .automata import format_dnf

    lines = []
    for q in range(A.n_states):
        lines.append(f"{q}: {A.label(q)}  F={format_rat(A.acceptance[q])}")
        for a, dnf in enumerate(A.delta[q]):
            lines.append(f"    {letter_str(A.alphabet[a])} -> {format_dnf(dnf, str)}")
    return "\n".join(lines)


__all__ = [
    "NORMALIZATIONS",
    "Translation",
    "Translator",
    "describe",
    "event_horizon",
    "powerset_alphabet",
    "sanity_boolean",
    "translate",
    "translate_full",
]
