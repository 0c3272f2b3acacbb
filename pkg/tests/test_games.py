import itertools
import random

import pytest

from discsched.games import MAX, MIN, solve_buchi


def _max_wins_by_strategies(owner, succ, accepting, v):
    # Max wins iff some positional choice leaves no reachable cycle of
    # non-accepting nodes for Min to stay in forever
    max_nodes = [u for u in range(len(owner)) if owner[u] == MAX]
    for pick in itertools.product(*(sorted(set(succ[u])) for u in max_nodes)):
        choice = dict(zip(max_nodes, pick))
        edges = {u: ([choice[u]] if u in choice else sorted(set(succ[u]))) for u in range(len(owner))}
        reach, stack = set(), [v]
        while stack:
            u = stack.pop()
            if u not in reach:
                reach.add(u)
                stack.extend(edges[u])
        bad = {u for u in reach if not accepting[u]}
        if not _cycle_within(bad, edges):
            return True
    return False


def _cycle_within(nodes, edges):
    remaining = set(nodes)
    changed = True
    while changed:
        changed = False
        for u in list(remaining):
            if not any(t in remaining for t in edges[u]):
                remaining.discard(u)
                changed = True
    return bool(remaining)


def test_single_accepting_loop():
    assert solve_buchi([MIN], [[0]], [True]) == [True]
    assert solve_buchi([MAX], [[0]], [False]) == [False]


def test_min_escapes_to_a_rejecting_sink():
    owner = [MIN, MAX]
    succ = [[0, 1], [1]]
    assert solve_buchi(owner, succ, [True, False]) == [False, False]
    owner[0] = MAX
    assert solve_buchi(owner, succ, [True, False]) == [True, False]


def test_dead_end_rejected():
    with pytest.raises(ValueError):
        solve_buchi([MAX, MIN], [[1], []], [True, True])


def test_against_positional_enumeration():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(1, 6)
        owner = [rng.choice((MAX, MIN)) for _ in range(n)]
        succ = [rng.sample(range(n), rng.randint(1, min(2, n))) for _ in range(n)]
        accepting = [rng.random() < 0.4 for _ in range(n)]
        win = solve_buchi(owner, succ, accepting)
        for v in range(n):
            assert win[v] == _max_wins_by_strategies(owner, succ, accepting, v)
