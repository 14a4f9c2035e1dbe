"""Full ranking by binary insertion over noisy duels, and best-expert search.

The insertion array is kept worst-first, so an inserted expert that beats
the probed element goes to its right; results are reported best-first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .duel import PAPER_CONSTANTS, DuelConfig, DuelConstants, DuelOutcome, DuelTrace, compare
from .env import SamplingOracle
from .errors import BadParams, NotIdentifiable

# duel(i, x, delta) -> FIRST when i is better than x
InsertDuel = Callable[[int, int, float], DuelOutcome]
# duel(m, x, delta, epsilon) -> FIRST when m is better than x
PrecisionDuel = Callable[[int, int, float, float], DuelOutcome]


@dataclass
class RankingResult:
    pi_hat: tuple[int, ...]
    queries: int
    duel_count: int
    traces: list[DuelTrace] | None = None
    duel_deltas: list[float] = field(default_factory=list)
    budget_exceeded: bool = False


@dataclass
class BestExpertResult:
    k_hat: int
    queries: int
    rounds: int
    survivor_history: list[tuple[int, ...]]
    duel_deltas: list[float] = field(default_factory=list)
    budget_exceeded: bool = False


def binary_search(delta: float, i: int, arr: Sequence[int], start: int, end: int, duel: InsertDuel) -> int:
    """Insertion index of expert ``i`` into the worst-first slice ``arr[start:end+1]``.

    Each probed pair is dueled once.  A NULL outcome (only possible when a
    budget cap cuts a duel short) settles on the probed position.
    """
    if start > end:
        return start
    if start == end:
        return start + 1 if duel(i, arr[start], delta) is DuelOutcome.FIRST else start
    mid = (start + end) // 2
    out = duel(i, arr[mid], delta)
    if out is DuelOutcome.FIRST:
        return binary_search(delta, i, arr, mid + 1, end, duel)
    if out is DuelOutcome.SECOND:
        return binary_search(delta, i, arr, start, mid - 1, duel)
    return mid


def ranking_delta(n: int, delta: float) -> float:
    """Per-duel confidence: delta over the n*ceil(log2 n) duels of binary insertion."""
    return delta / (n * max(1, math.ceil(math.log2(n))))


def insertion_rank(n: int, delta: float, duel: InsertDuel) -> tuple[tuple[int, ...], int]:
    """Rank experts 0..n-1 with any comparator; returns (best-first order, duel count)."""
    count = 0

    def counted(i, x, dl):
        nonlocal count
        count += 1
        return duel(i, x, dl)

    dl = ranking_delta(n, delta)
    arr = [0]
    for i in range(1, n):
        arr.insert(binary_search(dl, i, arr, 0, len(arr) - 1, counted), i)
    return tuple(reversed(arr)), count


def active_ranking(
    oracle: SamplingOracle,
    delta: float,
    budget_cap: int | None = None,
    constants: DuelConstants = PAPER_CONSTANTS,
    keep_traces: bool = False,
) -> RankingResult:
    n = oracle.n
    if not oracle.instance.strict_ranking and budget_cap is None and oracle.limit is None:
        raise NotIdentifiable("instance has tied experts; ranking needs a budget cap")

    traces: list[DuelTrace] = []
    deltas: list[float] = []

    def duel(i, x, dl):
        out, tr = compare(oracle, i, x, DuelConfig(dl, 0.0, None, constants))
        traces.append(tr)
        deltas.append(dl)
        return out

    start = oracle.total
    with oracle.capped(budget_cap):
        pi_hat, count = insertion_rank(n, delta, duel)
    return RankingResult(
        pi_hat=pi_hat,
        queries=oracle.total - start,
        duel_count=count,
        traces=traces if keep_traces else None,
        duel_deltas=deltas,
        budget_exceeded=any(tr.budget_exceeded for tr in traces),
    )


def max_search(delta: float, candidates: Sequence[int], epsilon: float, duel: PrecisionDuel) -> list[int]:
    """Champion pass then a clean-up pass; the final champion is returned first.

    Survivors of the clean-up are the experts the champion could not beat at
    precision ``epsilon``.
    """
    if not candidates:
        raise BadParams("max_search needs at least one candidate")
    if not epsilon > 0:
        raise BadParams("max_search needs a positive precision")
    dl = delta / (2 * len(candidates))
    champion = candidates[0]
    kept = [champion]
    for a in candidates[1:]:
        out = duel(champion, a, dl, epsilon)
        if out is DuelOutcome.NULL:
            kept.append(a)
        elif out is DuelOutcome.SECOND:
            champion, kept = a, [a]
    for i in kept[1:]:
        if duel(champion, i, dl, epsilon) is DuelOutcome.FIRST:
            kept.remove(i)
    return kept


def best_expert(
    oracle: SamplingOracle,
    delta: float,
    budget_cap: int | None = None,
    constants: DuelConstants = PAPER_CONSTANTS,
) -> BestExpertResult:
    """Repeated max-search, dividing the precision by 4 and halving the confidence each round."""
    n = oracle.n
    if n < 2:
        raise BadParams("best-expert search needs at least two experts")
    if not oracle.instance.strict_best and budget_cap is None and oracle.limit is None:
        raise NotIdentifiable("best expert is tied; set a budget cap")

    deltas: list[float] = []
    exceeded = False

    def duel(m, x, dl, eps):
        nonlocal exceeded
        out, tr = compare(oracle, m, x, DuelConfig(dl, eps, None, constants))
        deltas.append(dl)
        exceeded |= tr.budget_exceeded
        return out

    start = oracle.total
    survivors = list(range(n))
    history = [tuple(survivors)]
    eps, dl = 1.0, delta / 2
    with oracle.capped(budget_cap):
        while len(survivors) > 1 and not exceeded:
            survivors = max_search(dl, survivors, eps, duel)
            history.append(tuple(survivors))
            eps /= 4
            dl /= 2
    return BestExpertResult(
        k_hat=survivors[0],
        queries=oracle.total - start,
        rounds=len(history) - 1,
        survivor_history=history,
        duel_deltas=deltas,
        budget_exceeded=exceeded,
    )
