"""Syntax of discounted LTL with propositional quality operators.

The AST has eight node kinds. Derived connectives (F, G, their discounted
versions, and disjunction) are expanded by the parser, so downstream code
only ever sees the primitive nodes.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .values import ONE, ZERO, DiscountSeq, ExpDiscount, as_rat, format_rat, rat_bits


class FormulaError(ValueError):
    """Raised for malformed formulas; ``pos`` is a 0-based character offset."""

    def __init__(self, message: str, pos: Optional[int] = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


# --------------------------------------------------------------------------
# Quality operators


Evaluator = Callable[..., Fraction]
Transfer = Callable[[Fraction], Fraction]


@dataclass(frozen=True)
class QualityOp:
    """A monotone operator ``[0,1]^k -> [0,1]`` applied pointwise to truth values.

    ``transfer(delta)`` must return ``eps' > 0`` such that lowering every
    argument by at most ``eps'`` lowers the result by at most ``delta``.
    Identity of an operator is its name, arity and parameters.
    """

    name: str
    arity: int
    fn: Evaluator = field(compare=False, repr=False)
    monotone: bool = True
    transfer: Optional[Transfer] = field(default=None, compare=False, repr=False)
    params: tuple[Fraction, ...] = ()

    def __call__(self, *args: Fraction) -> Fraction:
        return eval_quality_op(self, args)

    def label(self) -> str:
        if self.params:
            return f"{self.name}{{{','.join(format_rat(p) for p in self.params)}}}"
        return self.name


def eval_quality_op(op: QualityOp, args: Sequence[Fraction]) -> Fraction:
    if len(args) != op.arity:
        raise ValueError(f"{op.name} expects {op.arity} arguments, got {len(args)}")
    return op.fn(*args)


def margin_transfer(op: QualityOp, delta: Fraction) -> Fraction:
    """Margin ``eps'`` to use for the arguments so that ``op`` loses at most ``delta``."""
    if op.transfer is None:
        raise ValueError(f"operator {op.name} has no margin transfer function")
    delta = as_rat(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    out = op.transfer(delta)
    if out <= 0:
        raise ValueError(f"transfer of {op.name} returned a nonpositive margin")
    return out


def _identity_transfer(delta: Fraction) -> Fraction:
    return delta


def _const_one(*_args: Fraction) -> Fraction:
    return ONE


def dualize_quality_op(op: QualityOp, d: Fraction) -> QualityOp:
    """The operator ``x -> 1 - d*op(1-x)``, used to push an operator through negation."""
    d = as_rat(d)
    if not op.monotone:
        raise ValueError("only monotone operators can be dualized")
    params = (d,) + op.params
    name = f"dual[{op.name}]"
    if d == 0:
        return QualityOp(name, op.arity, _const_one, True, _identity_transfer, params)

    inner = op.fn

    def fn(*xs: Fraction) -> Fraction:
        return 1 - d * inner(*(1 - x for x in xs))

    transfer = None
    if op.transfer is not None:
        base_transfer = op.transfer

        def transfer(delta: Fraction) -> Fraction:
            return base_transfer(delta / d)

    return QualityOp(name, op.arity, fn, True, transfer, params)


def scale_op(lam: Fraction) -> QualityOp:
    lam = _check_open_unit(as_rat(lam), "scale factor")
    return QualityOp("scale", 1, lambda v: lam * v, True, _identity_transfer, (lam,))


def lift_op(lam: Fraction) -> QualityOp:
    lam = _check_open_unit(as_rat(lam), "lift factor")
    return QualityOp("lift", 1, lambda v: lam * v + (1 - lam), True, _identity_transfer, (lam,))


AVG = QualityOp("avg", 2, lambda x, y: (x + y) / 2, True, _identity_transfer)
MIN = QualityOp("min", 2, lambda x, y: min(x, y), True, _identity_transfer)
MAX = QualityOp("max", 2, lambda x, y: max(x, y), True, _identity_transfer)


def _check_open_unit(x: Fraction, what: str) -> Fraction:
    if not ZERO < x < ONE:
        raise ValueError(f"{what} {format_rat(x)} must lie strictly between 0 and 1")
    return x


# name -> (number of rational parameters, factory)
_REGISTRY: dict[str, tuple[int, Callable[..., QualityOp]]] = {}

_MONOTONE_GRID = (ZERO, Fraction(1, 3), Fraction(1, 2), ONE)


def _looks_monotone(op: QualityOp) -> bool:
    grid = list(itertools.product(_MONOTONE_GRID, repeat=op.arity))
    for x in grid:
        fx = op.fn(*x)
        if not ZERO <= fx <= ONE:
            return False
        for i in range(op.arity):
            for hi in _MONOTONE_GRID:
                if hi > x[i]:
                    y = x[:i] + (hi,) + x[i + 1:]
                    if op.fn(*y) < fx:
                        return False
    return True


def register_quality_op(name: str, factory: Callable[..., QualityOp], n_params: int = 0) -> None:
    """Make ``name(...)`` (or ``name{p}(...)`` when ``n_params`` is 1) available to the parser.

    The factory is probed once with parameter 1/2; operators that are flagged
    non-monotone, or that visibly decrease on a small grid, are rejected.
    """
    if not re.fullmatch(r"[a-z][A-Za-z0-9_]*", name) or name == "true":
        raise ValueError(f"invalid operator name {name!r}")
    probe = factory(*([Fraction(1, 2)] * n_params))
    if not probe.monotone or not _looks_monotone(probe):
        raise ValueError(f"operator {name} is not monotone")
    _REGISTRY[name] = (n_params, factory)


def unregister_quality_op(name: str) -> None:
    _REGISTRY.pop(name, None)


def lookup_quality_op(name: str, params: Sequence[Fraction] = ()) -> QualityOp:
    try:
        n_params, factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unregistered quality operator {name!r}") from None
    if len(params) != n_params:
        raise ValueError(f"operator {name} takes {n_params} parameter(s), got {len(params)}")
    return factory(*params)


def registered_ops() -> list[str]:
    return sorted(_REGISTRY)


# --------------------------------------------------------------------------
# AST


class Formula:
    """Base class of AST nodes. Nodes are immutable and hash-consable."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, eq=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class UntilDisc(Formula):
    eta: ExpDiscount
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Apply(Formula):
    op: QualityOp
    args: tuple[Formula, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.op.arity:
            raise FormulaError(f"{self.op.name} expects {self.op.arity} arguments, got {len(self.args)}")

    def children(self):
        return self.args


TRUE = TrueF()


# Derived forms, as used by the parser.

def eventually(phi: Formula) -> Formula:
    return Until(TRUE, phi)


def always(phi: Formula) -> Formula:
    return Not(eventually(Not(phi)))


def eventually_disc(lam: Fraction, phi: Formula) -> Formula:
    return UntilDisc(ExpDiscount(lam), TRUE, phi)


def always_disc(lam: Fraction, phi: Formula) -> Formula:
    return Not(eventually_disc(lam, Not(phi)))


def disj(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def subformulas(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(f.children())


def atoms(phi: Formula) -> tuple[str, ...]:
    return tuple(sorted({f.name for f in subformulas(phi) if isinstance(f, Atom)}))


def negation_depth(phi: Formula) -> int:
    """Largest number of negations on any root-to-leaf path."""
    if isinstance(phi, Not):
        return 1 + negation_depth(phi.arg)
    return max((negation_depth(c) for c in phi.children()), default=0)


def is_discount_free(phi: Formula) -> bool:
    return not any(isinstance(f, (UntilDisc, Apply)) for f in subformulas(phi))


def formula_size(phi: Formula) -> int:
    """Node count plus the bit length of every rational constant."""
    total = 0
    for f in subformulas(phi):
        total += 1
        if isinstance(f, UntilDisc):
            total += rat_bits(f.eta.base)
        elif isinstance(f, Apply):
            total += sum(rat_bits(p) for p in f.op.params)
    return total


# --------------------------------------------------------------------------
# Printing


def _disc(eta: ExpDiscount) -> str:
    if eta.shift:
        return f"{{{format_rat(eta.base)}+{eta.shift}}}"
    return f"{{{format_rat(eta.base)}}}"


def pretty(phi: Formula) -> str:
    """Fully parenthesized concrete syntax that parses back to the same AST."""
    if isinstance(phi, TrueF):
        return "true"
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, Not):
        return "!" + _unary_operand(phi.arg)
    if isinstance(phi, Next):
        return "X " + _unary_operand(phi.arg)
    if isinstance(phi, And):
        return f"({pretty(phi.left)} & {pretty(phi.right)})"
    if isinstance(phi, Until):
        return f"({pretty(phi.left)} U {pretty(phi.right)})"
    if isinstance(phi, UntilDisc):
        return f"({pretty(phi.left)} U{_disc(phi.eta)} {pretty(phi.right)})"
    if isinstance(phi, Apply):
        return f"{phi.op.label()}({', '.join(pretty(a) for a in phi.args)})"
    raise TypeError(f"not a formula: {phi!r}")


def _unary_operand(phi: Formula) -> str:
    # binary nodes print their own parentheses
    return pretty(phi)


# --------------------------------------------------------------------------
# Parsing

KEYWORDS = frozenset({"true", "X", "F", "G", "U", "avg", "scale", "lift"})

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<disc>\{\s*[0-9]+(?:\s*/\s*[0-9]+)?\s*(?:\+\s*[0-9]+\s*)?\})
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[!&|(),])
    """,
    re.VERBOSE,
)

_DISC_INNER = re.compile(r"\{\s*([0-9]+)(?:\s*/\s*([0-9]+))?\s*(?:\+\s*([0-9]+)\s*)?\}")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    out: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos] == "{":
                raise FormulaError("malformed discount, expected {p/q} or {p/q+k}", pos)
            raise FormulaError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        word = m.group()
        if kind == "ident" and word[0] in "XFG" and word not in KEYWORDS:
            # atoms start lowercase, so "GFp" can only mean G F p
            lead = re.match(r"[XFG]+", word).group()
            for j, ch in enumerate(lead):
                out.append(_Tok("ident", ch, pos + j))
            if len(lead) < len(word):
                out.append(_Tok("ident", word[len(lead):], pos + len(lead)))
        elif kind != "ws":
            out.append(_Tok(kind, word, pos))
        pos = m.end()
    out.append(_Tok("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise FormulaError(f"expected {text!r}, found {found!r}", self.tok.pos)
        return self.advance()

    def discount(self, with_shift: bool = True) -> tuple[Fraction, int]:
        t = self.tok
        if t.kind != "disc":
            raise FormulaError("expected a discount annotation {p/q}", t.pos)
        self.advance()
        m = _DISC_INNER.fullmatch(t.text)
        num, den, shift = m.group(1), m.group(2), m.group(3)
        if den is not None and int(den) == 0:
            raise FormulaError("zero denominator", t.pos)
        lam = Fraction(int(num), int(den) if den else 1)
        if not ZERO < lam < ONE:
            raise FormulaError(f"discount {format_rat(lam)} must lie strictly between 0 and 1", t.pos)
        if shift is not None and not with_shift:
            raise FormulaError("a shift is only allowed on U", t.pos)
        return lam, int(shift) if shift else 0

    def parse(self) -> Formula:
        phi = self.disjunction()
        if self.tok.kind != "eof":
            raise FormulaError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return phi

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.tok.text == "|":
            self.advance()
            left = disj(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.until()
        while self.tok.text == "&":
            self.advance()
            left = And(left, self.until())
        return left

    def until(self) -> Formula:
        left = self.unary()
        if self.tok.text == "U":
            self.advance()
            if self.tok.kind == "disc":
                lam, shift = self.discount()
                return UntilDisc(ExpDiscount(lam, shift), left, self.until())
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        t = self.tok
        if t.text == "!":
            self.advance()
            return Not(self.unary())
        if t.text == "X":
            self.advance()
            return Next(self.unary())
        if t.text in ("F", "G"):
            self.advance()
            if self.tok.kind == "disc":
                lam, _ = self.discount(with_shift=False)
                body = self.unary()
                return eventually_disc(lam, body) if t.text == "F" else always_disc(lam, body)
            body = self.unary()
            return eventually(body) if t.text == "F" else always(body)
        return self.primary()

    def primary(self) -> Formula:
        t = self.tok
        if t.text == "(":
            self.advance()
            phi = self.disjunction()
            self.expect(")")
            return phi
        if t.kind != "ident":
            found = t.text or "end of input"
            raise FormulaError(f"expected a formula, found {found!r}", t.pos)
        self.advance()
        if t.text == "true":
            return TRUE
        nxt = self.tok
        if t.text in _REGISTRY and (nxt.text == "(" or nxt.kind == "disc"):
            return self.call(t)
        if t.text in KEYWORDS:
            raise FormulaError(f"keyword {t.text!r} cannot be used here", t.pos)
        if not re.fullmatch(r"[a-z][A-Za-z0-9_]*", t.text):
            raise FormulaError(f"invalid atom name {t.text!r}", t.pos)
        return Atom(t.text)

    def call(self, name_tok: _Tok) -> Formula:
        params: list[Fraction] = []
        if self.tok.kind == "disc":
            lam, _ = self.discount(with_shift=False)
            params.append(lam)
        self.expect("(")
        args = [self.disjunction()]
        while self.tok.text == ",":
            self.advance()
            args.append(self.disjunction())
        self.expect(")")
        try:
            op = lookup_quality_op(name_tok.text, params)
        except ValueError as exc:
            raise FormulaError(str(exc), name_tok.pos) from None
        if len(args) != op.arity:
            raise FormulaError(f"{op.name} expects {op.arity} arguments, got {len(args)}", name_tok.pos)
        return Apply(op, tuple(args))


def parse_formula(text: str) -> Formula:
    """Parse concrete syntax into a desugared AST.

    >>> pretty(parse_formula("F{1/2} p1"))
    '(true U{1/2} p1)'
    """
    return _Parser(text).parse()


register_quality_op("avg", lambda: AVG)
register_quality_op("min", lambda: MIN)
register_quality_op("max", lambda: MAX)
register_quality_op("scale", scale_op, n_params=1)
register_quality_op("lift", lift_op, n_params=1)
