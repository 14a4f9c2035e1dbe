"""Two-expert comparison: the median-elimination probe and the (s, h) doubling grid.

``try_compare`` guesses that about ``s`` tasks carry a gap of at least ``h``.
It samples a multiset of tasks, then alternates between a global stopping
test and median elimination, which halves each direction's multiset while
doubling the per-task sample count.  ``compare`` runs it over a doubling grid
of (s, h) guesses until one call reaches a decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .env import SamplingOracle
from .errors import BadParams, BudgetExceeded, NotIdentifiable


class DuelOutcome(Enum):
    FIRST = "first"
    SECOND = "second"
    NULL = "null"

    def winner(self, a: int, b: int) -> int | None:
        return {DuelOutcome.FIRST: a, DuelOutcome.SECOND: b}.get(self)


@dataclass(frozen=True)
class DuelConstants:
    phi_factor: float = 26.0
    n0_factor: float = 64.0
    grid_factor: float = 4.0
    stop_threshold_factor: float = 2.0


PAPER_CONSTANTS = DuelConstants()
CI_CONSTANTS = DuelConstants(phi_factor=4.0, n0_factor=8.0)

PROFILES = {"paper": PAPER_CONSTANTS, "ci": CI_CONSTANTS}


@dataclass(frozen=True)
class DuelConfig:
    delta: float
    epsilon: float = 0.0
    budget_cap: int | None = None
    constants: DuelConstants = PAPER_CONSTANTS

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise BadParams(f"delta must lie in (0, 1), got {self.delta}")
        if not self.epsilon >= 0.0:
            raise BadParams(f"epsilon must be >= 0, got {self.epsilon}")
        if self.budget_cap is not None and self.budget_cap < 1:
            raise BadParams("budget_cap must be a positive integer")


class GridCell(NamedTuple):
    rho: int
    r: int
    s: float
    h: float
    delta: float
    queries: int
    outcome: DuelOutcome


@dataclass
class DuelTrace:
    rho_reached: int = 0
    grid_cells_run: list[GridCell] = field(default_factory=list)
    queries: int = 0
    outcome: DuelOutcome = DuelOutcome.NULL
    budget_exceeded: bool = False


class Iteration(NamedTuple):
    ell: int
    size12: int
    size21: int
    t: int
    threshold: float
    stat12: float
    stat21: float
    queries: int


def phi_size(delta: float, d: int, s: float, factor: float = 26.0) -> int:
    """Number of task draws: the next power of two above factor*log(1/delta)*d/s."""
    return 2 ** max(0, math.ceil(math.log2(factor * math.log(1.0 / delta) * d / s)))


def n0_size(h: float, factor: float = 64.0) -> int:
    return math.ceil(factor / h ** 2)


def n_iterations(d: int, s: float) -> int:
    # the 1e-12 guards ratios such as d/s = (4/3)^k against round-off
    return max(0, math.ceil(math.log(d / s) / math.log(4.0 / 3.0) - 1e-12)) + 1


def cell_budget(d: int, s: float, h: float, delta: float) -> float:
    """Closed-form per-call query bound 4096 log_{4/3}(16d/(9s)) log(1/delta) / (s h^2)."""
    return 4096.0 * math.log(16.0 * d / (9.0 * s), 4.0 / 3.0) * math.log(1.0 / delta) / (s * h * h)


def max_probe_queries(d: int, s: float, h: float, delta: float,
                      constants: DuelConstants = PAPER_CONSTANTS) -> int:
    """Worst-case queries of one ``try_compare`` call, roundings included."""
    phi = phi_size(delta, d, s, constants.phi_factor)
    n0 = n0_size(h, constants.n0_factor)
    size, total = phi, 0
    for ell in range(n_iterations(d, s)):
        t = math.ceil(n0 * phi / size)
        union = size if ell == 0 else min(phi, 2 * size)
        total += 2 * t * union
        size = math.ceil(size / 2)
    return total


def _keep_top_half(entries: np.ndarray, values: np.ndarray) -> np.ndarray:
    k = math.ceil(entries.size / 2)
    order = np.lexsort((entries, -values))  # largest value first, then lowest draw index
    return np.sort(entries[order[:k]])


def try_compare(
    oracle: SamplingOracle,
    a: int,
    b: int,
    delta: float,
    s: float,
    h: float,
    constants: DuelConstants = PAPER_CONSTANTS,
    rng: np.random.Generator | None = None,
    log: list[Iteration] | None = None,
) -> DuelOutcome:
    """Median-elimination probe at sparsity guess ``s`` and gap guess ``h``.

    Entries of the task multiset are identified by draw index.  Each
    direction (a over b, b over a) keeps its own surviving multiset; an entry
    surviving in both directions is sampled once per iteration and the fresh
    samples serve both.  Raises ``BudgetExceeded`` if the oracle's cap would
    be overrun.
    """
    d = oracle.d
    if a == b:
        raise BadParams("cannot compare an expert with itself")
    if not 0.0 < delta < 1.0:
        raise BadParams(f"delta must lie in (0, 1), got {delta}")
    if not 0.0 < s <= d:
        raise BadParams(f"s must lie in (0, d], got {s}")
    if not h > 0.0:
        raise BadParams(f"h must be positive, got {h}")
    rng = oracle.learner_rng if rng is None else rng

    phi = phi_size(delta, d, s, constants.phi_factor)
    n0 = n0_size(h, constants.n0_factor)
    budget = n0 * phi
    threshold = math.sqrt(constants.stop_threshold_factor * math.log(2.0 / delta) / budget)
    tasks = rng.integers(0, d, size=phi)

    alive12 = np.arange(phi)
    alive21 = alive12
    mu = np.empty(phi)
    n_iter = n_iterations(d, s)
    for ell in range(1, n_iter + 1):
        t = math.ceil(budget / alive12.size)
        union = alive12 if alive21 is alive12 else np.union1d(alive12, alive21)
        oracle.reserve(2 * t * union.size)
        before = oracle.total
        sums = oracle.query_sums(a, tasks[union], t) - oracle.query_sums(b, tasks[union], t)
        mu[union] = sums / t

        stat12 = float(mu[alive12].mean())
        stat21 = -float(mu[alive21].mean())
        if log is not None:
            log.append(Iteration(ell, alive12.size, alive21.size, t, threshold,
                                 stat12, stat21, oracle.total - before))
        if stat12 >= threshold:
            return DuelOutcome.FIRST
        if stat21 >= threshold:
            return DuelOutcome.SECOND
        if ell < n_iter:
            alive12 = _keep_top_half(alive12, mu[alive12])
            alive21 = _keep_top_half(alive21, -mu[alive21])
    return DuelOutcome.NULL


def compare(
    oracle: SamplingOracle,
    a: int,
    b: int,
    config: DuelConfig,
    rng: np.random.Generator | None = None,
) -> tuple[DuelOutcome, DuelTrace]:
    """Decide which of experts ``a`` and ``b`` is better, or return NULL.

    Wrong with probability at most ``config.delta``; decisive (with the same
    probability) whenever the L2 distance of the two rows exceeds epsilon.
    With epsilon = 0 on identical rows the grid never ends, so a budget cap
    is required there.
    """
    if a == b:
        raise BadParams("cannot compare an expert with itself")
    if (config.epsilon == 0.0 and config.budget_cap is None and oracle.limit is None
            and np.array_equal(oracle.instance.means[a], oracle.instance.means[b])):
        raise NotIdentifiable(f"experts {a} and {b} are identical; set a budget cap")

    d = oracle.d
    c = config.constants
    log_d = math.log(max(d, 2))
    eps2 = config.epsilon ** 2
    trace = DuelTrace()
    start = oracle.total

    with oracle.capped(config.budget_cap):
        rho = 1
        try:
            while trace.outcome is DuelOutcome.NULL and eps2 < c.grid_factor * math.log(2 * d) * d * 2.0 ** -rho:
                trace.rho_reached = rho
                delta_r = config.delta / (10.0 * rho ** 3 * log_d)
                for r in range(rho + 1):
                    s_r = 2.0 ** r * d / 2.0 ** rho
                    h_r = 2.0 ** (-r / 2)
                    before = oracle.total
                    try:
                        out = try_compare(oracle, a, b, delta_r, s_r, h_r, c, rng)
                    except BudgetExceeded:
                        trace.grid_cells_run.append(
                            GridCell(rho, r, s_r, h_r, delta_r, oracle.total - before, DuelOutcome.NULL))
                        raise
                    trace.grid_cells_run.append(GridCell(rho, r, s_r, h_r, delta_r, oracle.total - before, out))
                    if out is not DuelOutcome.NULL:
                        trace.outcome = out
                        break
                rho += 1
        except BudgetExceeded:
            trace.budget_exceeded = True

    trace.queries = oracle.total - start
    return trace.outcome, trace
