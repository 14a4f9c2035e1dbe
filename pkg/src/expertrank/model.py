"""Instances, gap profiles and the closed-form complexity quantities.

Expert and task ids are 0-based throughout the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllZero, BadIndex, BadParams, NotMonotone, OutOfRange

INF = math.inf


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PerformanceMatrix:
    """n x d matrix of mean performances (expert i on task j)."""

    means: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.means, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise BadParams(f"expected a non-empty 2-D matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise BadParams("matrix has non-finite entries")
        object.__setattr__(self, "means", _frozen(m))

    @property
    def n(self) -> int:
        return self.means.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class MonotoneInstance:
    matrix: PerformanceMatrix
    ordering: tuple[int, ...]  # best expert first
    strict_ranking: bool
    strict_best: bool

    @property
    def means(self) -> np.ndarray:
        return self.matrix.means

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def d(self) -> int:
        return self.matrix.d

    @property
    def best(self) -> int:
        return self.ordering[0]

    def rank_of(self, expert: int) -> int:
        return self.ordering.index(expert)

    def better(self, a: int, b: int) -> int:
        """The dominating expert of the pair (the first one on ties)."""
        return a if self.rank_of(a) <= self.rank_of(b) else b


@dataclass(frozen=True)
class GapProfile:
    gaps: np.ndarray
    sorted_gaps: np.ndarray

    @classmethod
    def from_gaps(cls, gaps) -> GapProfile:
        g = np.asarray(gaps, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise BadParams("gap vector must be 1-D and non-empty")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise BadParams("gaps must be finite and non-negative")
        return cls(_frozen(g), _frozen(np.sort(g)[::-1]))


@dataclass(frozen=True)
class EffectiveSparsity:
    s_star: int  # 1-based count of significant coordinates
    x_star: float
    delta_star_sq: float


@dataclass(frozen=True)
class ComplexityReport:
    pair_H: float
    ranking_H: tuple[float, ...]
    best_G: tuple[float, ...]
    lb_two: float
    lb_ranking: float
    lb_best: float
    delta: float
    top_pair_sparsity: EffectiveSparsity | None = field(default=None)

    def as_dict(self) -> dict:
        out = {
            "delta": self.delta,
            "pair_H": self.pair_H,
            "ranking_H": list(self.ranking_H),
            "best_G": list(self.best_G),
            "lb_two": self.lb_two,
            "lb_ranking": self.lb_ranking,
            "lb_best": self.lb_best,
        }
        sp = self.top_pair_sparsity
        out["effective_sparsity"] = None if sp is None else {
            "s_star": sp.s_star, "x_star": sp.x_star, "delta_star_sq": sp.delta_star_sq,
        }
        return out


def dominates(u: np.ndarray, v: np.ndarray) -> bool:
    return bool(np.all(u >= v))


def validate_instance(matrix: PerformanceMatrix | np.ndarray) -> MonotoneInstance:
    """Check boundedness and monotonicity, and recover the ordering.

    Under monotonicity, sorting rows by their sum (descending, stable) is a
    dominance order, so it is enough to verify consecutive pairs.
    """
    if not isinstance(matrix, PerformanceMatrix):
        matrix = PerformanceMatrix(matrix)
    m = matrix.means
    if np.any(m < 0.0) or np.any(m > 1.0):
        raise OutOfRange("mean performances must lie in [0, 1]")

    order = sorted(range(matrix.n), key=lambda i: (-float(m[i].sum()), i))
    for hi, lo in zip(order, order[1:]):
        if not dominates(m[hi], m[lo]):
            raise NotMonotone(f"experts {hi} and {lo} are not comparable on every task")

    distinct = [bool(np.any(m[a] != m[b])) for a, b in zip(order, order[1:])]
    strict_ranking = all(distinct)
    # rows are chained, so the best differs from all others iff it differs from the runner-up
    strict_best = matrix.n == 1 or distinct[0]
    return MonotoneInstance(matrix, tuple(order), strict_ranking, strict_best)


def _check_expert(instance: MonotoneInstance, i: int) -> None:
    if not (0 <= i < instance.n):
        raise BadIndex(f"expert {i} not in [0, {instance.n})")


def gap_profile(instance: MonotoneInstance, a: int, b: int) -> GapProfile:
    _check_expert(instance, a)
    _check_expert(instance, b)
    if a == b:
        raise BadIndex("gap profile needs two distinct experts")
    return GapProfile.from_gaps(np.abs(instance.means[a] - instance.means[b]))


def effective_sparsity(profile: GapProfile | np.ndarray) -> EffectiveSparsity:
    """Smallest maximiser s of s * x_(s)^2 over the sorted gaps."""
    if not isinstance(profile, GapProfile):
        profile = GapProfile.from_gaps(profile)
    xs = profile.sorted_gaps
    if xs[0] <= 0.0:
        raise AllZero("every gap is zero")
    scores = np.arange(1, xs.size + 1) * xs ** 2
    k = int(np.argmax(scores))  # argmax returns the first maximiser
    return EffectiveSparsity(k + 1, float(xs[k]), float(scores[k]))


def sq_dist(instance: MonotoneInstance, a: int, b: int) -> float:
    diff = instance.means[a] - instance.means[b]
    return float(diff @ diff)


def _ratio(d: int, dist2: float) -> float:
    return INF if dist2 == 0.0 else d / dist2


def _scaled(h: float, log_factor: float) -> float:
    # a non-positive log factor makes the lower bound vacuous
    if log_factor <= 0.0:
        return 0.0
    return h * log_factor


def complexity_report(instance: MonotoneInstance, delta: float) -> ComplexityReport:
    if instance.n < 2:
        raise BadParams("complexity report needs at least two experts")
    if not 0.0 < delta < 1.0:
        raise BadParams("delta must lie in (0, 1)")
    pi, d = instance.ordering, instance.d
    ranking_H = tuple(_ratio(d, sq_dist(instance, pi[i], pi[i + 1])) for i in range(len(pi) - 1))
    best_G = tuple(_ratio(d, sq_dist(instance, pi[0], pi[i])) for i in range(1, len(pi)))
    pair_H = ranking_H[0]

    log4 = math.log(1.0 / (4.0 * delta))
    lb_two = _scaled(pair_H / 2.0, math.log(1.0 / (6.0 * delta)))
    lb_ranking = sum(_scaled(h, log4) for h in ranking_H)
    lb_best = sum(_scaled(g, log4) for g in best_G)

    prof = gap_profile(instance, pi[0], pi[1])
    sparsity = effective_sparsity(prof) if prof.sorted_gaps[0] > 0 else None
    return ComplexityReport(pair_H, ranking_H, best_G, lb_two, lb_ranking, lb_best, delta, sparsity)
