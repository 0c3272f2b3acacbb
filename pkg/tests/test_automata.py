import json
import random
from fractions import Fraction as Fr

import pytest

from _gen import (
    LETTERS,
    QUARTERS,
    alt_value_by_strategies,
    lasso_value_by_runs,
    random_acceptance,
    random_alternating,
    random_lasso,
)
from discsched.automata import (
    AcceptanceAutomaton,
    AlternatingAutomaton,
    AutomatonError,
    LassoWord,
    all_lassos,
    alt_lasso_value,
    apply_quality_op,
    as_alternating,
    automaton_from_dict,
    automaton_from_json,
    automaton_to_dict,
    automaton_to_dot,
    automaton_to_json,
    dealternate,
    drop_leaf_dominated,
    lasso_value,
    merge_dnf,
    optimal_value,
    simplify_dnf,
)
from discsched.formula import AVG, MAX, MIN

A1 = (frozenset(),)
E = frozenset()


def const(v, alphabet=A1):
    return AcceptanceAutomaton(alphabet, [[(0,)] * len(alphabet)], [0], [v])


def leaf(v):
    return frozenset({(E, Fr(v))})


def run_is_consistent(A, run):
    states = list(run.prefix) + list(run.cycle) + [run.knot]
    word = run.word
    for i in range(len(states) - 1):
        a = A.letter_index(word.letter(i))
        assert states[i + 1] in A.delta[states[i]][a]
    return states[0] in A.initial


class TestOptimalValue:
    def test_single_state(self):
        value, run = optimal_value(const(Fr(1)))
        assert value == 1 and run.knot == 0 and run.prefix == ()

    def test_transient_state_does_not_count(self):
        A = AcceptanceAutomaton(A1, [[(1,)], [(1,)]], [0], [Fr(1), Fr(1, 2)])
        value, run = optimal_value(A)
        assert value == Fr(1, 2)
        assert run.knot == 1 and run.prefix == (0,)

    def test_tie_break_prefers_shorter_lasso(self):
        # states 1 and 2 both carry 1; 2 is adjacent to the initial state
        A = AcceptanceAutomaton(A1, [[(1, 2)], [(1,)], [(2,)]], [0], [0, 1, 1])
        assert optimal_value(A)[1].knot == 1

    def test_witness_is_a_run_with_the_value(self):
        rng = random.Random(3)
        for _ in range(60):
            A = random_acceptance(rng)
            value, run = optimal_value(A)
            assert run_is_consistent(A, run)
            assert A.acceptance[run.knot] == value
            assert lasso_value(A, run.word) == value

    def test_matches_exhaustive_lassos(self):
        rng = random.Random(11)
        for _ in range(15):
            A = random_acceptance(rng, max_states=4)
            n = A.n_states
            words = {w.canonical() for w in all_lassos(A.alphabet, n, n)}
            assert optimal_value(A)[0] == max(lasso_value(A, w) for w in words)


class TestLassoValue:
    @pytest.mark.parametrize("w", [LassoWord((), (E,)), LassoWord((E, E), (E, E, E))])
    def test_constant(self, w):
        assert lasso_value(const(Fr(1, 3)), w) == Fr(1, 3)

    def test_letter_outside_alphabet(self):
        with pytest.raises(AutomatonError):
            lasso_value(const(Fr(1)), LassoWord((), (frozenset({"p"}),)))

    def test_against_run_enumeration(self):
        rng = random.Random(5)
        for _ in range(200):
            A = random_acceptance(rng, max_states=3, values=(Fr(0), Fr(1, 2), Fr(1)))
            w = random_lasso(rng, A.alphabet)
            assert lasso_value(A, w) == lasso_value_by_runs(A, w)

    def test_boolean_acceptance_is_classical_buchi(self):
        # "infinitely many p": state 1 is entered on p, state 0 otherwise
        p = frozenset({"p"})
        A = AcceptanceAutomaton(LETTERS, [[(0,), (1,)], [(0,), (1,)]], [0], [0, 1])
        for w in all_lassos(LETTERS, 2, 3):
            assert lasso_value(A, w) == (1 if p in w.cycle else 0)

    def test_representation_does_not_matter(self):
        rng = random.Random(8)
        for _ in range(50):
            A = random_acceptance(rng)
            w = random_lasso(rng, A.alphabet)
            unrolled = LassoWord(w.prefix + w.cycle, w.cycle * 2)
            assert lasso_value(A, w) == lasso_value(A, unrolled) == lasso_value(A, w.canonical())


class TestAlternating:
    W = LassoWord((E,), (E, E))

    def test_leaf_only(self):
        A = AlternatingAutomaton(A1, [[leaf(Fr(2, 3))]], [0], [0])
        assert alt_lasso_value(A, self.W) == Fr(2, 3)

    def test_self_loop(self):
        A = AlternatingAutomaton(A1, [[frozenset({(frozenset({0}), Fr(1))})]], [0], [1])
        assert alt_lasso_value(A, self.W) == 1

    def test_conjunction_takes_the_worse_branch(self):
        split = frozenset({(frozenset({1, 2}), Fr(1))})
        loop1 = frozenset({(frozenset({1}), Fr(1))})
        loop2 = frozenset({(frozenset({2}), Fr(1))})
        A = AlternatingAutomaton(A1, [[split], [loop1], [loop2]], [0], [0, Fr(1, 4), Fr(3, 4)])
        assert alt_lasso_value(A, self.W) == Fr(1, 4)

    def test_value_atom_caps_a_disjunct(self):
        d = frozenset({(frozenset({0}), Fr(1, 2)), (E, Fr(1, 3))})
        A = AlternatingAutomaton(A1, [[d]], [0], [1])
        assert alt_lasso_value(A, self.W) == Fr(1, 2)

    def test_nondeterministic_view_agrees(self):
        rng = random.Random(2)
        for _ in range(100):
            A = random_acceptance(rng, max_states=4)
            w = random_lasso(rng, A.alphabet)
            assert alt_lasso_value(as_alternating(A), w) == lasso_value(A, w)

    def test_against_strategy_enumeration(self):
        rng = random.Random(13)
        for _ in range(150):
            A = random_alternating(rng, max_states=3)
            w = random_lasso(rng, A.alphabet, max_prefix=2, max_cycle=2)
            assert alt_lasso_value(A, w) == alt_value_by_strategies(A, w)

    def test_empty_disjunction_rejected(self):
        with pytest.raises(AutomatonError):
            AlternatingAutomaton(A1, [[frozenset()]], [0], [1])


class TestDealternate:
    def test_nondeterministic_input_keeps_its_language(self):
        rng = random.Random(4)
        for _ in range(20):
            A = random_acceptance(rng, max_states=4, max_letters=1)
            N = dealternate(as_alternating(A))
            for w in all_lassos(A.alphabet, 3, 3):
                assert lasso_value(N, w) == lasso_value(A, w)

    @pytest.mark.parametrize("prune", [True, False])
    def test_language_preserved(self, prune):
        rng = random.Random(21)
        for _ in range(40):
            A = random_alternating(rng)
            N = dealternate(A, prune=prune)
            for _ in range(10):
                w = random_lasso(rng, A.alphabet)
                assert lasso_value(N, w) == alt_lasso_value(A, w)

    def test_pruning_only_shrinks(self):
        rng = random.Random(22)
        for _ in range(30):
            A = random_alternating(rng)
            assert dealternate(A).n_states <= dealternate(A, prune=False).n_states

    def test_result_has_no_dead_ends(self):
        rng = random.Random(23)
        for _ in range(30):
            N = dealternate(random_alternating(rng))
            assert all(succ for row in N.delta for succ in row)


class TestQualityProduct:
    def test_average_of_constants(self):
        P = apply_quality_op(AVG, [const(Fr(1)), const(Fr(0))])
        assert lasso_value(P, LassoWord((), (E,))) == Fr(1, 2)
        assert optimal_value(P)[0] == Fr(1, 2)

    def test_identity(self):
        rng = random.Random(30)
        for _ in range(20):
            A = random_acceptance(rng, max_states=4)
            P = apply_quality_op(lambda x: x, [A])
            for _ in range(5):
                w = random_lasso(rng, A.alphabet)
                assert lasso_value(P, w) == lasso_value(A, w)

    @pytest.mark.parametrize("op", [AVG, MIN, MAX])
    def test_pointwise(self, op):
        rng = random.Random(31)
        for _ in range(20):
            A = random_acceptance(rng, max_states=3, max_letters=1)
            B = random_acceptance(rng, max_states=3, max_letters=1)
            alphabet = A.alphabet
            P = apply_quality_op(op, [A, B])
            for _ in range(5):
                w = random_lasso(rng, alphabet)
                assert lasso_value(P, w) == op(lasso_value(A, w), lasso_value(B, w))

    def test_alphabet_mismatch(self):
        with pytest.raises(AutomatonError):
            apply_quality_op(AVG, [const(Fr(1)), const(Fr(1), LETTERS)])

    def test_arity_mismatch(self):
        with pytest.raises(AutomatonError):
            apply_quality_op(AVG, [const(Fr(1))])


class TestDnf:
    d = frozenset({(frozenset({1}), Fr(1, 2)), (frozenset({1}), Fr(1, 3)), (frozenset({1, 2}), Fr(1)), (E, Fr(1, 4))})

    def test_subsumption(self):
        # {1} with 1/2 absorbs {1} with 1/3 and {1,2} with value 1 stays
        assert simplify_dnf(self.d) == frozenset(
            {(frozenset({1}), Fr(1, 2)), (frozenset({1, 2}), Fr(1)), (E, Fr(1, 4))}
        )

    def test_merge_keeps_best_value_per_state_set(self):
        assert (frozenset({1}), Fr(1, 3)) not in merge_dnf(self.d)
        assert len(merge_dnf(self.d)) == 3

    def test_leaf_domination(self):
        d = frozenset({(E, Fr(1, 2)), (E, Fr(1, 4)), (frozenset({1}), Fr(1, 3)), (frozenset({2}), Fr(3, 4))})
        assert drop_leaf_dominated(d) == frozenset({(E, Fr(1, 2)), (frozenset({2}), Fr(3, 4))})


class TestExport:
    def test_json_round_trip_nondeterministic(self):
        rng = random.Random(40)
        for _ in range(20):
            A = random_acceptance(rng)
            B = automaton_from_json(automaton_to_json(A))
            assert isinstance(B, AcceptanceAutomaton)
            assert (B.alphabet, B.delta, B.initial, B.acceptance) == (A.alphabet, A.delta, A.initial, A.acceptance)

    def test_json_round_trip_alternating(self):
        rng = random.Random(41)
        for _ in range(20):
            A = random_alternating(rng)
            B = automaton_from_json(automaton_to_json(A))
            assert isinstance(B, AlternatingAutomaton)
            assert (B.delta, B.initial, B.acceptance) == (A.delta, A.initial, A.acceptance)

    def test_schema_fields(self):
        data = automaton_to_dict(const(Fr(1, 2)))
        assert data["states"] == [{"id": 0, "label": "0", "acceptance": "1/2"}]
        assert data["transitions"] == [{"src": 0, "letter": 0, "dnf": [{"states": [0], "value": "1"}]}]
        assert json.loads(json.dumps(data)) == data

    @pytest.mark.parametrize(
        "patch",
        [
            {"initial": [5]},
            {"states": [{"id": 0, "acceptance": "3/2"}]},
            {"kind": "weird"},
        ],
    )
    def test_bad_documents(self, patch):
        data = automaton_to_dict(const(Fr(1, 2)))
        data.update(patch)
        with pytest.raises(AutomatonError):
            automaton_from_dict(data)

    def test_invalid_json(self):
        with pytest.raises(AutomatonError):
            automaton_from_json("{")

    def test_dot(self):
        A = AlternatingAutomaton(A1, [[frozenset({(frozenset({0}), Fr(1, 2))})]], [0], [1])
        dot = automaton_to_dot(A)
        assert dot.startswith("digraph")
        assert 'label="1/2"' in dot and "F=1" in dot
        assert "init0 -> q0" in dot


class TestValidation:
    def test_dead_end(self):
        with pytest.raises(AutomatonError):
            AcceptanceAutomaton(A1, [[()]], [0], [1])

    def test_empty_initial(self):
        with pytest.raises(AutomatonError):
            AcceptanceAutomaton(A1, [[(0,)]], [], [1])

    def test_value_range(self):
        with pytest.raises(AutomatonError):
            AcceptanceAutomaton(A1, [[(0,)]], [0], [2])

    def test_duplicate_letters(self):
        with pytest.raises(AutomatonError):
            AcceptanceAutomaton((E, E), [[(0,), (0,)]], [0], [1])

    def test_lasso_cycle_nonempty(self):
        with pytest.raises(ValueError):
            LassoWord((E,), ())

    def test_canonical(self):
        a, b = E, frozenset({"p"})
        assert LassoWord((a, b), (a, b, a, b)).canonical() == LassoWord((), (a, b))
        assert LassoWord((b, a), (a,)).canonical() == LassoWord((b,), (a,))


def test_quarter_values_survive_round_trip():
    A = AcceptanceAutomaton(A1, [[(0,)]], [0], [QUARTERS[3]])
    assert automaton_from_json(automaton_to_json(A)).acceptance == (Fr(3, 4),)
