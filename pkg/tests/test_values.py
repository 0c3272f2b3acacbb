from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from discsched.values import (
    DiscountSeq,
    EventuallyPeriodic,
    ExpDiscount,
    as_rat,
    check_margin,
    discount_value,
    event_horizon,
    format_rat,
    parse_rat,
    rat_bits,
    release_inf,
    seq_act,
    seq_append,
    seq_odot,
    until_sup_or_inf,
)

unit_rats = st.fractions(min_value=0, max_value=1, max_denominator=12)
seqs = st.lists(unit_rats, min_size=1, max_size=5).map(lambda xs: DiscountSeq.of(*xs))


def S(*xs):
    return DiscountSeq.of(*(Fr(x) for x in xs))


class TestRationals:
    def test_parse_and_format(self):
        assert parse_rat("2/4") == Fr(1, 2)
        assert parse_rat(" 3 ") == 3
        assert format_rat(Fr(1, 2)) == "1/2"
        assert format_rat(Fr(4, 4)) == "1"
        assert format_rat(Fr(0)) == "0"

    def test_floats_are_rejected(self):
        with pytest.raises(TypeError):
            as_rat(0.5)
        with pytest.raises(TypeError):
            as_rat(True)

    @pytest.mark.parametrize("bad", ["", "1/0", "a", "1//2"])
    def test_parse_errors(self, bad):
        with pytest.raises(ValueError):
            parse_rat(bad)

    @pytest.mark.parametrize("eps", ["0", "1", "3/2", "-1/2"])
    def test_margin_must_be_inside_unit_interval(self, eps):
        with pytest.raises(ValueError):
            check_margin(eps)

    def test_bits(self):
        assert rat_bits(Fr(1, 2)) == 1 + 2
        assert rat_bits(Fr(99, 100)) == 7 + 7


class TestSequenceOps:
    def test_odot_worked_example(self):
        d = S(Fr(1, 4), Fr(8, 27), Fr(3, 4))
        assert seq_odot(d, Fr(4, 5)) == S(Fr(1, 4), Fr(8, 27), Fr(3, 5))

    @pytest.mark.parametrize(
        "entries, factor, expected",
        [((1,), 1, (1,)), ((Fr(1, 2),), Fr(1, 2), (Fr(1, 4),))],
    )
    def test_odot_small(self, entries, factor, expected):
        assert S(*entries).odot(factor) == S(*expected)

    def test_append_worked_example(self):
        d = S(Fr(1, 4), Fr(8, 27), Fr(3, 4))
        assert seq_append(d, Fr(4, 5)) == S(Fr(1, 4), Fr(8, 27), Fr(3, 4), Fr(4, 5))
        assert S(1).append(1) == S(1, 1)
        assert S(Fr(1, 2)).append(0) == S(Fr(1, 2), 0)

    @pytest.mark.parametrize(
        "entries, v, expected",
        [
            ((Fr(3, 4), Fr(1, 3), Fr(2, 5)), 1, Fr(3, 5)),
            ((1, Fr(1, 2), 1), 0, Fr(1, 2)),
            ((1, 1), Fr(1, 4), Fr(3, 4)),
        ],
    )
    def test_act_examples(self, entries, v, expected):
        assert seq_act(S(*entries), v) == expected

    @given(unit_rats)
    def test_unit_sequence_acts_as_identity(self, v):
        assert DiscountSeq.unit().act(v) == v

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValueError):
            DiscountSeq(())

    def test_str(self):
        assert str(S(1, Fr(1, 2))) == "<1,1/2>"

    def test_hash_consing_by_value(self):
        assert {S(Fr(2, 4)), S(Fr(1, 2))} == {S(Fr(1, 2))}


class TestSequenceLaws:
    @given(seqs, unit_rats, unit_rats)
    def test_monotone_when_odd_antitone_when_even(self, d, v, w):
        lo, hi = min(v, w), max(v, w)
        if d.odd:
            assert d.act(lo) <= d.act(hi)
        else:
            assert d.act(lo) >= d.act(hi)

    @given(seqs, unit_rats, unit_rats)
    def test_odot_compatibility(self, d, factor, v):
        assert d.odot(factor).act(v) == d.act(factor * v)

    @given(seqs, unit_rats)
    def test_negation_law(self, d, v):
        assert d.append(1).act(v) == d.act(1 - v)

    @given(seqs, unit_rats)
    def test_range(self, d, v):
        assert 0 <= d.act(v) <= 1

    @given(seqs, unit_rats)
    def test_act_matches_alternating_sum(self, d, v):
        # d1 - d1 d2 + d1 d2 d3 - ... +- d1...dn v, written out directly
        entries = list(d.entries)
        total, prod = Fr(0), Fr(1)
        for i, x in enumerate(entries[:-1]):
            prod *= x
            total += prod if i % 2 == 0 else -prod
        prod *= entries[-1] * v
        total += prod if (len(entries) - 1) % 2 == 0 else -prod
        assert d.act(v) == total


class TestDiscounting:
    @pytest.mark.parametrize(
        "base, shift, i, expected",
        [(Fr(1, 2), 0, 2, Fr(1, 4)), (Fr(1, 2), 1, 0, Fr(1, 2)), (Fr(99, 100), 0, 0, Fr(1))],
    )
    def test_discount_value(self, base, shift, i, expected):
        assert discount_value(ExpDiscount(base, shift), i) == expected

    @pytest.mark.parametrize("base", [0, 1, Fr(3, 2)])
    def test_base_must_be_strictly_inside(self, base):
        with pytest.raises(ValueError):
            ExpDiscount(base)

    def test_shifted(self):
        eta = ExpDiscount(Fr(1, 3))
        assert eta.shifted(2).value(1) == eta.value(3)

    @given(st.fractions(min_value=Fr(1, 20), max_value=Fr(19, 20), max_denominator=20), st.integers(0, 20))
    def test_strictly_decreasing(self, base, i):
        eta = ExpDiscount(base)
        assert eta.value(i + 1) < eta.value(i)

    @pytest.mark.parametrize(
        "base, prod, eps, expected",
        [(Fr(1, 2), 1, Fr(1, 4), 2), (Fr(1, 2), Fr(1, 10), Fr(1, 4), 0), (Fr(99, 100), 1, Fr(1, 10), 230)],
    )
    def test_event_horizon(self, base, prod, eps, expected):
        assert event_horizon(ExpDiscount(base), prod, eps) == expected

    @given(
        st.fractions(min_value=Fr(1, 10), max_value=Fr(9, 10), max_denominator=10),
        st.fractions(min_value=Fr(1, 10), max_value=1, max_denominator=10),
        st.fractions(min_value=Fr(1, 50), max_value=Fr(1, 2), max_denominator=50),
    )
    def test_event_horizon_is_least(self, base, prod, eps):
        eta = ExpDiscount(base)
        k = event_horizon(eta, prod, eps)
        assert eta.value(k) * prod <= eps
        assert k == 0 or eta.value(k - 1) * prod > eps

    def test_horizon_method(self):
        assert ExpDiscount(Fr(1, 2)).horizon(Fr(1, 8)) == 3


periodic = st.builds(
    EventuallyPeriodic,
    st.lists(st.fractions(0, 1, max_denominator=6), max_size=4).map(tuple),
    st.lists(st.fractions(0, 1, max_denominator=6), min_size=1, max_size=4).map(tuple),
)


class TestUntilReleaseDuality:
    @given(periodic, periodic)
    def test_both_sides_agree(self, a, b):
        assert release_inf(a, b) == until_sup_or_inf(a, b)

    @given(periodic, periodic)
    def test_against_long_unrolling(self, a, b):
        n = 80
        lhs = min(max([b[i]] + [a[j] for j in range(i)]) for i in range(n))
        assert release_inf(a, b) == lhs

    def test_hand_example(self):
        # a = 0, 1/2, 0, 0, ...  b = 1, 1, 1/4, 1/4, ...
        a = EventuallyPeriodic((Fr(0), Fr(1, 2)), (Fr(0),))
        b = EventuallyPeriodic((Fr(1), Fr(1)), (Fr(1, 4),))
        assert release_inf(a, b) == Fr(1, 2)
        assert until_sup_or_inf(a, b) == Fr(1, 2)

    def test_cycle_must_be_nonempty(self):
        with pytest.raises(ValueError):
            EventuallyPeriodic((Fr(1),), ())

    def test_indexing(self):
        a = EventuallyPeriodic((Fr(1),), (Fr(0), Fr(1, 2)))
        assert [a[i] for i in range(5)] == [1, 0, Fr(1, 2), 0, Fr(1, 2)]
