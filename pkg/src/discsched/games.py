"""Two-player Büchi games on explicit finite arenas.

Player 0 (Max) wins a play iff it visits an accepting node infinitely often.
Every node must have at least one successor.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

MAX, MIN = 0, 1


def _attractor(
    player: int,
    target: Sequence[int],
    alive: list[bool],
    owner: Sequence[int],
    succ: Sequence[Sequence[int]],
    pred: Sequence[Sequence[int]],
) -> list[bool]:
    n = len(owner)
    inside = [False] * n
    count = [0] * n
    for v in range(n):
        if alive[v]:
            count[v] = sum(1 for w in succ[v] if alive[w])
    queue = deque()
    for v in target:
        if alive[v] and not inside[v]:
            inside[v] = True
            queue.append(v)
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if not alive[v] or inside[v]:
                continue
            if owner[v] == player:
                inside[v] = True
                queue.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    inside[v] = True
                    queue.append(v)
    return inside


def solve_buchi(
    owner: Sequence[int],
    succ: Sequence[Sequence[int]],
    accepting: Sequence[bool],
) -> list[bool]:
    """Return the winning region of Max as a boolean mask."""
    n = len(owner)
    pred: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        if not succ[v]:
            raise ValueError(f"node {v} has no successor")
        for w in set(succ[v]):
            pred[w].append(v)
    alive = [True] * n
    while True:
        acc = [v for v in range(n) if alive[v] and accepting[v]]
        reach = _attractor(MAX, acc, alive, owner, succ, pred)
        trap = [v for v in range(n) if alive[v] and not reach[v]]
        if not trap:
            return alive
        lost = _attractor(MIN, trap, alive, owner, succ, pred)
        for v in range(n):
            if lost[v]:
                alive[v] = False
