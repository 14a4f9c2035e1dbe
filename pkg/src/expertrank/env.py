"""Seeded, query-counting sampling oracles and instance generators.

Every sample is a deterministic transform of one raw variate taken in order
from the oracle's noise stream (a standard normal for Gaussian noise, a
uniform for Bernoulli noise).  Because of that, an algorithm may look ahead
at the samples a prospective query sequence *would* return and then charge
only the prefix it actually uses; the charged samples are bit-identical to
the ones that one-at-a-time queries would have produced.

``query_sums`` returns the sum of ``count`` fresh draws of a cell using a
single raw variate (exact in distribution: ``count*M + sqrt(count)*Z`` for
unit Gaussians, the binomial quantile for Bernoulli).  It still charges
``count`` queries to the ledger.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import BadIndex, BadParams, BudgetExceeded
from .model import MonotoneInstance, PerformanceMatrix, validate_instance

_REFILL = 1 << 14


class NoiseModel(str, Enum):
    GAUSSIAN = "gaussian_unit"
    BERNOULLI = "bernoulli"
    NOISELESS = "noiseless"


class SamplingOracle:
    """Query interface over an instance with a per-cell query ledger."""

    def __init__(
        self,
        instance: MonotoneInstance,
        noise: NoiseModel | str = NoiseModel.GAUSSIAN,
        seed: int = 0,
        budget_cap: int | None = None,
    ):
        self.instance = instance
        self.noise = NoiseModel(noise)
        self.seed = int(seed)
        noise_seq, learner_seq = np.random.SeedSequence(self.seed).spawn(2)
        self._rng = np.random.Generator(np.random.PCG64(noise_seq))
        # randomness owned by the learner (task draws), kept apart from the noise stream
        self.learner_rng = np.random.Generator(np.random.PCG64(learner_seq))
        self.counts = np.zeros((instance.n, instance.d), dtype=np.int64)
        self.total = 0
        self.limit = None if budget_cap is None else int(budget_cap)
        self._buf = np.empty(0)
        self._pos = 0

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def d(self) -> int:
        return self.instance.d

    @property
    def remaining(self) -> float:
        return math.inf if self.limit is None else self.limit - self.total

    @property
    def exhausted(self) -> bool:
        return self.limit is not None and self.total >= self.limit

    @contextmanager
    def capped(self, cap: int | None):
        """Temporarily allow at most ``cap`` further queries."""
        old = self.limit
        if cap is not None:
            new = self.total + int(cap)
            self.limit = new if old is None else min(old, new)
        try:
            yield self
        finally:
            self.limit = old

    def reserve(self, k: int) -> None:
        if self.limit is not None and self.total + k > self.limit:
            raise BudgetExceeded(self.limit, k)

    # raw variate stream

    def _peek_raw(self, k: int) -> np.ndarray:
        have = self._buf.size - self._pos
        if have < k:
            draw = max(k - have, _REFILL)
            if self.noise is NoiseModel.BERNOULLI:
                fresh = self._rng.random(draw)
            else:
                fresh = self._rng.standard_normal(draw)
            self._buf = np.concatenate([self._buf[self._pos:], fresh])
            self._pos = 0
        return self._buf[self._pos:self._pos + k]

    def _take_raw(self, k: int) -> np.ndarray:
        raw = self._peek_raw(k).copy()
        self._pos += k
        return raw

    def _check(self, experts: np.ndarray, tasks: np.ndarray) -> None:
        if experts.size and (experts.min() < 0 or experts.max() >= self.n):
            raise BadIndex(f"expert id outside [0, {self.n})")
        if tasks.size and (tasks.min() < 0 or tasks.max() >= self.d):
            raise BadIndex(f"task id outside [0, {self.d})")

    def _transform(self, experts, tasks, raw) -> np.ndarray:
        mu = self.instance.means[experts, tasks]
        if self.noise is NoiseModel.GAUSSIAN:
            return mu + raw
        if self.noise is NoiseModel.BERNOULLI:
            return (raw < mu).astype(float)
        return mu.astype(float)

    def _raw_needed(self, k: int) -> int:
        return 0 if self.noise is NoiseModel.NOISELESS else k

    # single and batched queries

    def query(self, expert: int, task: int) -> float:
        return float(self.query_many([expert], [task])[0])

    def lookahead(self, experts, tasks) -> np.ndarray:
        """Samples the query sequence would return, without charging anything."""
        experts = np.asarray(experts, dtype=np.int64)
        tasks = np.asarray(tasks, dtype=np.int64)
        self._check(experts, tasks)
        raw = self._peek_raw(self._raw_needed(experts.size))
        return self._transform(experts, tasks, raw)

    def charge(self, experts, tasks) -> np.ndarray:
        """Run a query sequence: charge the ledger and return the samples."""
        experts = np.asarray(experts, dtype=np.int64)
        tasks = np.asarray(tasks, dtype=np.int64)
        self._check(experts, tasks)
        self.reserve(experts.size)
        raw = self._take_raw(self._raw_needed(experts.size))
        np.add.at(self.counts, (experts, tasks), 1)
        self.total += int(experts.size)
        return self._transform(experts, tasks, raw)

    query_many = charge

    def query_sums(self, expert: int, tasks, count: int) -> np.ndarray:
        """Per-entry sums of ``count`` fresh draws of (expert, task)."""
        tasks = np.asarray(tasks, dtype=np.int64)
        count = int(count)
        if count < 1:
            raise BadParams("count must be positive")
        self._check(np.array([expert]), tasks)
        self.reserve(count * tasks.size)
        mu = self.instance.means[expert, tasks]
        raw = self._take_raw(self._raw_needed(tasks.size))
        if self.noise is NoiseModel.GAUSSIAN:
            out = count * mu + math.sqrt(count) * raw
        elif self.noise is NoiseModel.BERNOULLI:
            # ppf(0) is -1; keep u strictly positive
            out = stats.binom.ppf(np.maximum(raw, 1e-300), count, mu).astype(float)
        else:
            out = count * mu
        np.add.at(self.counts[expert], tasks, count)
        self.total += count * int(tasks.size)
        return out


def gen_sparse_instance(d: int, s: int, seed: int) -> MonotoneInstance:
    """Two experts whose gap vector has ``s`` non-zero entries, the k-th equal to (k/(3s))^2.

    The worse expert's means are i.i.d. uniform on [0, 1/2]; the better expert
    adds the gap vector.  Which row holds the better expert is itself random.
    """
    if not (isinstance(d, (int, np.integer)) and isinstance(s, (int, np.integer))):
        raise BadParams("d and s must be integers")
    if d < 1 or not 1 <= s <= d:
        raise BadParams(f"need 1 <= s <= d, got d={d}, s={s}")
    rng = np.random.default_rng(seed)
    worse = rng.uniform(0.0, 0.5, size=d)
    where = rng.choice(d, size=s, replace=False)
    gaps = np.zeros(d)
    gaps[where] = (np.arange(1, s + 1) / (3.0 * s)) ** 2
    rows = [worse + gaps, worse]
    if rng.random() < 0.5:
        rows.reverse()
    return validate_instance(np.vstack(rows))


def gen_chain_instance(n: int, d: int, gaps) -> MonotoneInstance:
    """Constant rows starting at 1 whose consecutive L2 distances equal ``gaps``."""
    gaps = np.asarray(gaps, dtype=float).ravel()
    if n < 2 or d < 1 or gaps.size != n - 1:
        raise BadParams(f"need n >= 2, d >= 1 and n-1 gaps, got n={n}, d={d}, {gaps.size} gaps")
    if np.any(gaps <= 0):
        raise BadParams("chain gaps must be positive")
    levels = 1.0 - np.concatenate([[0.0], np.cumsum(gaps / math.sqrt(d))])
    if levels[-1] < -1e-12:
        raise BadParams("sum of gaps / sqrt(d) exceeds 1; means would leave [0, 1]")
    levels = np.clip(levels, 0.0, 1.0)
    return validate_instance(np.repeat(levels[:, None], d, axis=1))


def format_matrix(matrix: PerformanceMatrix | MonotoneInstance | np.ndarray) -> str:
    """Plain-text format: a header line ``n d`` then n lines of d decimals."""
    m = matrix.means if hasattr(matrix, "means") else np.asarray(matrix, dtype=float)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def write_matrix(matrix: PerformanceMatrix | MonotoneInstance | np.ndarray, path) -> None:
    Path(path).write_text(format_matrix(matrix))


def read_matrix(path) -> PerformanceMatrix:
    text = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    text = [ln for ln in text if ln]
    if not text:
        raise BadParams(f"{path}: empty matrix file")
    try:
        n, d = (int(tok) for tok in text[0].split())
        rows = [[float(tok) for tok in ln.split()] for ln in text[1:]]
    except ValueError as exc:
        raise BadParams(f"{path}: malformed matrix file ({exc})") from None
    if len(rows) != n or any(len(r) != d for r in rows):
        raise BadParams(f"{path}: header says {n}x{d} but body does not match")
    return PerformanceMatrix(np.array(rows))
