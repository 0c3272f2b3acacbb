"""Exact truth values, exponential discounting and discount sequences.

Truth values and discount factors are :class:`fractions.Fraction` objects.
Fractions are always held in lowest terms, so value equality is also
structural equality, which the translation relies on for hash-consing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Protocol, Union

Rat = Fraction
RatLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rat(x: RatLike) -> Fraction:
    """Coerce ``x`` to a Fraction, rejecting floats to keep arithmetic exact."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not truth values")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rat(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def parse_rat(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"n"``; decimal literals are accepted as exact decimals."""
    s = text.strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rat(x: Fraction) -> str:
    """Serialize as ``"p/q"`` in lowest terms, or ``"n"`` when the denominator is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rat_bits(x: Fraction) -> int:
    """Bit length of a rational constant (numerator plus denominator)."""
    return abs(x.numerator).bit_length() + x.denominator.bit_length()


def check_unit(x: Fraction, what: str = "value") -> Fraction:
    if not ZERO <= x <= ONE:
        raise ValueError(f"{what} {format_rat(x)} is outside [0,1]")
    return x


def check_margin(eps: RatLike) -> Fraction:
    """Validate a margin, which must lie strictly between 0 and 1."""
    e = as_rat(eps)
    if not ZERO < e < ONE:
        raise ValueError(f"margin {format_rat(e)} must lie strictly between 0 and 1")
    return e


class Discounting(Protocol):
    """A strictly decreasing function from naturals to [0,1] that tends to 0."""

    def value(self, i: int) -> Fraction: ...

    def horizon(self, threshold: Fraction) -> int: ...


@dataclass(frozen=True)
class ExpDiscount:
    """Shifted exponential discounting ``i -> base ** (shift + i)``."""

    base: Fraction
    shift: int = 0

    def __post_init__(self) -> None:
        base = as_rat(self.base)
        object.__setattr__(self, "base", base)
        if not ZERO < base < ONE:
            raise ValueError(f"discount base {format_rat(base)} must lie strictly between 0 and 1")
        if self.shift < 0:
            raise ValueError("shift must be a natural number")

    def value(self, i: int) -> Fraction:
        return self.base ** (self.shift + i)

    def shifted(self, k: int = 1) -> "ExpDiscount":
        return ExpDiscount(self.base, self.shift + k)

    def horizon(self, threshold: Fraction) -> int:
        """Least ``i`` with ``value(i) <= threshold``."""
        return event_horizon(self, ONE, threshold)


def discount_value(eta: ExpDiscount, i: int) -> Fraction:
    return eta.value(i)


def event_horizon(eta: ExpDiscount, running_product: RatLike, eps: RatLike) -> int:
    """Least ``k`` with ``eta(k) * running_product <= eps``.

    Found by repeated exact multiplication, so no rounding can move the cut.
    """
    prod = as_rat(running_product)
    eps = as_rat(eps)
    if eps <= 0:
        raise ValueError("threshold must be positive")
    k = 0
    cur = eta.value(0) * prod
    while cur > eps:
        cur *= eta.base
        k += 1
    return k


@dataclass(frozen=True)
class DiscountSeq:
    """A nonempty sequence of accumulated discount factors.

    Its length tracks how many negations were passed on the way down, and the
    parity of that length says whether the current position is positive
    (odd) or negative (even).
    """

    entries: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("a discount sequence must be nonempty")
        # sequences are hashed constantly during translation
        object.__setattr__(self, "_hash", hash(self.entries))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def of(cls, *xs: RatLike) -> "DiscountSeq":
        return cls(tuple(check_unit(as_rat(x), "discount") for x in xs))

    @classmethod
    def unit(cls) -> "DiscountSeq":
        return _UNIT

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def odd(self) -> bool:
        return len(self.entries) % 2 == 1

    def product(self) -> Fraction:
        p = ONE
        for x in self.entries:
            p *= x
        return p

    def odot(self, d: RatLike) -> "DiscountSeq":
        """Multiply the last entry by ``d``."""
        *init, last = self.entries
        return DiscountSeq((*init, last * as_rat(d)))

    def append(self, d: RatLike) -> "DiscountSeq":
        return DiscountSeq((*self.entries, as_rat(d)))

    def drop_last(self) -> "DiscountSeq":
        return DiscountSeq(self.entries[:-1])

    def act(self, v: RatLike) -> Fraction:
        """Apply the sequence to a truth value.

        ``<d> acts as v -> d*v`` and ``(ds ++ <d>)`` acts as
        ``v -> ds.act(1 - d*v)``; evaluated from the last entry backwards.
        """
        x = as_rat(v)
        entries = self.entries
        x = entries[-1] * x
        for d in reversed(entries[:-1]):
            x = d * (1 - x)
        return x

    def __str__(self) -> str:
        return "<" + ",".join(format_rat(x) for x in self.entries) + ">"


_UNIT = DiscountSeq((ONE,))


def seq_odot(ds: DiscountSeq, d: RatLike) -> DiscountSeq:
    return ds.odot(d)


def seq_append(ds: DiscountSeq, d: RatLike) -> DiscountSeq:
    return ds.append(d)


def seq_act(ds: DiscountSeq, v: RatLike) -> Fraction:
    return ds.act(v)


def rat_min(xs: Iterable[Fraction], default: Fraction = ONE) -> Fraction:
    return min(xs, default=default)


@dataclass(frozen=True)
class EventuallyPeriodic:
    """The sequence ``prefix . cycle . cycle ...`` of values in [0, 1]."""

    prefix: tuple[Fraction, ...]
    cycle: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(check_unit(x) for x in self.prefix))
        object.__setattr__(self, "cycle", tuple(check_unit(x) for x in self.cycle))
        if not self.cycle:
            raise ValueError("the cycle must be nonempty")

    def __getitem__(self, i: int) -> Fraction:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def values(self) -> set[Fraction]:
        return set(self.prefix) | set(self.cycle)


def _settle(a: EventuallyPeriodic, b: EventuallyPeriodic) -> tuple[int, int]:
    """Index from which both sequences are periodic, and a common period."""
    return max(len(a.prefix), len(b.prefix)), lcm(len(a.cycle), len(b.cycle))


def release_inf(a: EventuallyPeriodic, b: EventuallyPeriodic) -> Fraction:
    """``inf_i max(b_i, a_0, ..., a_{i-1})``.

    Past the settling index every ``a`` value has entered the running max
    after one period, and from then on the terms only repeat.
    """
    start, period = _settle(a, b)
    out, seen = ONE, ZERO
    for i in range(start + 2 * period):
        out = min(out, max(b[i], seen))
        seen = max(seen, a[i])
    return out


def until_sup_or_inf(a: EventuallyPeriodic, b: EventuallyPeriodic) -> Fraction:
    """``max(sup_j min(a_j, b_0, ..., b_j), inf_i b_i)``."""
    start, period = _settle(a, b)
    best, run = ZERO, ONE
    for j in range(start + 2 * period):
        run = min(run, b[j])
        best = max(best, min(a[j], run))
    return max(best, min(b.values()))
