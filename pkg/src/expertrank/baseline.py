"""Borda-score baseline: uniform task sampling with anytime-valid stopping.

Both routines draw tasks uniformly at random, so they estimate each expert's
average performance over all tasks.  They run in vectorised chunks: the
samples of a whole chunk are looked ahead, the first stopping time inside it
is located, and only the queries up to that point are charged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duel import DuelOutcome
from .env import SamplingOracle
from .errors import BadParams
from .rank import BestExpertResult

_FIRST_CHUNK = 256
_MAX_CHUNK = 1 << 18


@dataclass
class BordaDuelState:
    t: int = 0
    running_mean: float = 0.0
    delta: float = 0.1
    budget_exceeded: bool = False


def duel_radius(t, delta: float, scale: float = 4.0, log_mult: float = 4.0):
    """Anytime radius sqrt((scale/t) log(log_mult t^2 / delta)) for a paired difference."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(scale / t * np.log(log_mult * t * t / delta))


def expert_radius(t, n: int, delta: float):
    t = np.asarray(t, dtype=float)
    return np.sqrt(2.0 / t * np.log(4.0 * n * t * t / delta))


def borda_duel(
    oracle: SamplingOracle,
    a: int,
    b: int,
    delta: float,
    budget_cap: int | None = None,
    rng: np.random.Generator | None = None,
    state: BordaDuelState | None = None,
    radius_scale: float = 4.0,
    radius_log_mult: float = 4.0,
) -> DuelOutcome:
    """Sample both experts on one uniform task per step until the mean difference clears the radius."""
    if a == b:
        raise BadParams("cannot compare an expert with itself")
    if not 0.0 < delta < 1.0:
        raise BadParams(f"delta must lie in (0, 1), got {delta}")
    rng = oracle.learner_rng if rng is None else rng
    st = BordaDuelState(delta=delta) if state is None else state
    total = 0.0
    chunk = _FIRST_CHUNK
    with oracle.capped(budget_cap):
        while True:
            pairs_left = oracle.remaining // 2
            if pairs_left < 1:
                st.budget_exceeded = True
                return DuelOutcome.NULL
            k = int(min(chunk, pairs_left))
            tasks = np.repeat(rng.integers(0, oracle.d, size=k), 2)
            experts = np.tile([a, b], k)
            x = oracle.lookahead(experts, tasks)
            steps = st.t + np.arange(1, k + 1)
            means = (total + np.cumsum(x[0::2] - x[1::2])) / steps
            hit = np.flatnonzero(np.abs(means) >= duel_radius(steps, delta, radius_scale, radius_log_mult))
            used = k if hit.size == 0 else int(hit[0]) + 1
            x = oracle.charge(experts[:2 * used], tasks[:2 * used])
            total += float(np.sum(x[0::2] - x[1::2]))
            st.t += used
            st.running_mean = total / st.t
            if hit.size:
                return DuelOutcome.FIRST if st.running_mean > 0 else DuelOutcome.SECOND
            chunk = min(2 * chunk, _MAX_CHUNK)


def borda_best_expert(
    oracle: SamplingOracle,
    delta: float,
    budget_cap: int | None = None,
    rng: np.random.Generator | None = None,
) -> BestExpertResult:
    """Successive elimination on the uniform-task means, sampling active experts round-robin."""
    if not 0.0 < delta < 1.0:
        raise BadParams(f"delta must lie in (0, 1), got {delta}")
    n, d = oracle.n, oracle.d
    if n < 2:
        raise BadParams("need at least two experts")
    rng = oracle.learner_rng if rng is None else rng
    start = oracle.total
    active = np.arange(n)
    sums = np.zeros(n)
    t = 0  # every active expert has exactly t samples
    history = [tuple(int(i) for i in active)]
    chunk = _FIRST_CHUNK
    exceeded = False
    with oracle.capped(budget_cap):
        while active.size > 1:
            m = active.size
            rounds_left = oracle.remaining // m
            if rounds_left < 1:
                exceeded = True
                break
            k = int(min(chunk, rounds_left))
            experts = np.tile(active, k)
            tasks = rng.integers(0, d, size=k * m)
            x = oracle.lookahead(experts, tasks).reshape(k, m)
            steps = t + np.arange(1, k + 1)
            means = (sums[active] + np.cumsum(x, axis=0)) / steps[:, None]
            rad = expert_radius(steps, n, delta)[:, None]
            lower_best = np.max(means - rad, axis=1, keepdims=True)
            out = means + rad < lower_best
            hit = np.flatnonzero(out.any(axis=1))
            used = k if hit.size == 0 else int(hit[0]) + 1
            x = oracle.charge(experts[:used * m], tasks[:used * m]).reshape(used, m)
            sums[active] += x.sum(axis=0)
            t += used
            if hit.size:
                active = active[~out[used - 1]]
                history.append(tuple(int(i) for i in active))
                chunk = _FIRST_CHUNK
            else:
                chunk = min(2 * chunk, _MAX_CHUNK)

    leader = int(active[np.argmax(sums[active])]) if active.size > 1 else int(active[0])
    return BestExpertResult(
        k_hat=leader,
        queries=oracle.total - start,
        rounds=len(history) - 1,
        survivor_history=history,
        budget_exceeded=exceeded,
    )
