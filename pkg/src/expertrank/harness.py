"""Replication engine, sparsity/dimension sweeps, bound reports and file emission."""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .baseline import borda_best_expert, borda_duel
from .duel import PROFILES, DuelConfig, DuelOutcome, compare
from .env import NoiseModel, SamplingOracle, gen_chain_instance, gen_sparse_instance, read_matrix
from .errors import ConfigError
from .model import MonotoneInstance, complexity_report, validate_instance
from .rank import active_ranking, best_expert, insertion_rank

MODES = ("duel", "ranking", "best_expert")
ALGORITHMS = ("paper", "borda")
GENERATORS = ("sparse", "chain", "file")

# per-run query caps applied when a config leaves budget_cap unset
PROFILE_CAPS = {"paper": None, "ci": 10**7}

CSV_HEADER = ("algo", "n", "d", "s", "delta", "epsilon", "rep", "seed", "queries", "correct", "wall_time_ms")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "duel"
    algorithm: str = "paper"
    generator: str = "sparse"
    n: int = 2
    d: int = 10
    s: int = 1
    gaps: tuple[float, ...] = ()
    matrix_path: str | None = None
    noise: str = NoiseModel.GAUSSIAN.value
    delta: float = 0.1
    epsilon: float = 0.0
    replications: int = 20
    seed: int = 0
    budget_cap: int | None = None
    profile: str = "paper"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.generator not in GENERATORS:
            raise ConfigError(f"generator must be one of {GENERATORS}, got {self.generator!r}")
        if self.generator == "file" and not self.matrix_path:
            raise ConfigError("generator 'file' needs matrix_path")
        if self.generator == "sparse" and not 1 <= self.s <= self.d:
            raise ConfigError(f"sparse generator needs 1 <= s <= d, got s={self.s}, d={self.d}")
        if self.generator == "chain" and len(self.gaps) != self.n - 1:
            raise ConfigError(f"chain generator needs n-1={self.n - 1} gaps, got {len(self.gaps)}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.profile not in PROFILES:
            raise ConfigError(f"profile must be one of {tuple(PROFILES)}, got {self.profile!r}")
        if self.budget_cap is not None and self.budget_cap < 1:
            raise ConfigError("budget_cap must be positive")
        try:
            NoiseModel(self.noise)
        except ValueError:
            raise ConfigError(f"unknown noise model {self.noise!r}") from None

    @property
    def effective_cap(self) -> int | None:
        return self.budget_cap if self.budget_cap is not None else PROFILE_CAPS[self.profile]


@dataclass(frozen=True)
class RunRecord:
    algo: str
    n: int
    d: int
    s: int
    delta: float
    epsilon: float
    rep: int
    seed: int
    queries: int
    correct: bool
    wall_time_ms: int

    def csv_row(self) -> list[str]:
        row = []
        for name in CSV_HEADER:
            v = getattr(self, name)
            if isinstance(v, bool):
                row.append("true" if v else "false")
            elif isinstance(v, float):
                row.append(repr(v))
            else:
                row.append(str(v))
        return row


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    d: int
    s: int
    algo: str
    mean_queries: float
    correct: int
    reps: int


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow] = field(default_factory=list)
    records: list[RunRecord] = field(default_factory=list)

    def series(self, algo: str) -> tuple[list[float], list[float]]:
        pts = sorted((r.value, r.mean_queries) for r in self.rows if r.algo == algo)
        return [p[0] for p in pts], [p[1] for p in pts]

    @property
    def algorithms(self) -> list[str]:
        return sorted({r.algo for r in self.rows})


def derive_seed(*keys: int) -> int:
    """Stable 32-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def build_instance(config: ExperimentConfig, rep_seed: int) -> MonotoneInstance:
    if config.generator == "sparse":
        return gen_sparse_instance(config.d, config.s, derive_seed(rep_seed, 1))
    if config.generator == "chain":
        return gen_chain_instance(config.n, config.d, config.gaps)
    return validate_instance(read_matrix(config.matrix_path))


def _run_one(config: ExperimentConfig, rep: int) -> RunRecord:
    rep_seed = derive_seed(config.seed, rep)
    instance = build_instance(config, rep_seed)
    oracle = SamplingOracle(instance, config.noise, seed=rep_seed)
    constants = PROFILES[config.profile]
    cap = config.effective_cap
    adaptive = config.algorithm == "paper"

    t0 = time.perf_counter()
    if config.mode == "duel":
        if adaptive:
            out, _ = compare(oracle, 0, 1, DuelConfig(config.delta, config.epsilon, cap, constants))
        else:
            out = borda_duel(oracle, 0, 1, config.delta, cap)
        if np.array_equal(instance.means[0], instance.means[1]):
            correct = out is DuelOutcome.NULL
        else:
            correct = out.winner(0, 1) == instance.better(0, 1)
    elif config.mode == "ranking":
        if adaptive:
            pi_hat = active_ranking(oracle, config.delta, cap, constants).pi_hat
        else:
            with oracle.capped(cap):
                pi_hat, _ = insertion_rank(
                    instance.n, config.delta, lambda i, x, dl: borda_duel(oracle, i, x, dl))
        correct = pi_hat == instance.ordering
    else:
        if adaptive:
            k_hat = best_expert(oracle, config.delta, cap, constants).k_hat
        else:
            k_hat = borda_best_expert(oracle, config.delta, cap).k_hat
        correct = k_hat == instance.best
    wall = int(round((time.perf_counter() - t0) * 1000))

    s = config.s if config.generator == "sparse" else -1
    return RunRecord(config.algorithm, instance.n, instance.d, s, config.delta, config.epsilon,
                     rep, rep_seed, oracle.total, bool(correct), wall)


def _run_star(args):
    return _run_one(*args)


def run_replications(config: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """Run ``config.replications`` independent seeded runs; records come back sorted by rep."""
    jobs = [(config, rep) for rep in range(config.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_star, jobs))
    else:
        records = [_run_one(*job) for job in jobs]
    return sorted(records, key=lambda r: r.rep)


def _aggregate(axis: str, value: float, cfg: ExperimentConfig, recs: list[RunRecord]) -> SweepRow:
    return SweepRow(axis, value, cfg.d, cfg.s, cfg.algorithm,
                    float(np.mean([r.queries for r in recs])), sum(r.correct for r in recs), len(recs))


def _sweep(axis: str, points: list[tuple[float, int, int]], algorithms, reps, delta, seed,
           profile, workers) -> SweepResult:
    result = SweepResult(axis)
    for value, d, s in points:
        for algo in algorithms:
            cfg = ExperimentConfig(mode="duel", algorithm=algo, generator="sparse", n=2, d=d, s=s,
                                   delta=delta, replications=reps, seed=derive_seed(seed, d, s),
                                   profile=profile)
            recs = run_replications(cfg, workers)
            result.records.extend(recs)
            result.rows.append(_aggregate(axis, value, cfg, recs))
    return result


def sweep_sparsity(d: int = 10, reps: int = 20, delta: float = 0.1, seed: int = 0,
                   algorithms: Sequence[str] = ALGORITHMS, profile: str = "paper",
                   workers: int = 1) -> SweepResult:
    """Mean duel queries for every sparsity s = 1..d (axis value s/d)."""
    if d < 1:
        raise ConfigError("d must be >= 1")
    return _sweep("s/d", [(s / d, d, s) for s in range(1, d + 1)], algorithms, reps, delta,
                  seed, profile, workers)


def dimension_sparsity(rate: float, d: int) -> int:
    # round half up; the reference protocol does not say how s is rounded
    return max(1, math.floor(rate * d + 0.5))


def sweep_dimension(rate: float = 1 / 3, dims: Sequence[int] = (4, 8, 16, 32, 64), reps: int = 20,
                    delta: float = 0.1, seed: int = 0, algorithms: Sequence[str] = ALGORITHMS,
                    profile: str = "paper", workers: int = 1) -> SweepResult:
    if not dims:
        raise ConfigError("dims must be non-empty")
    if not 0.0 < rate <= 1.0:
        raise ConfigError("sparsity rate must lie in (0, 1]")
    pts = [(float(d), int(d), min(int(d), dimension_sparsity(rate, d))) for d in dims]
    return _sweep("d", pts, algorithms, reps, delta, seed, profile, workers)


def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.6g}"


def report_bounds(instance: MonotoneInstance, delta: float, fmt: str = "text") -> str:
    rep = complexity_report(instance, delta)
    if fmt == "json":
        def clean(v):
            if isinstance(v, float) and math.isinf(v):
                return "inf"
            if isinstance(v, list):
                return [clean(x) for x in v]
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            return v
        return json.dumps(clean(rep.as_dict()), indent=2)
    lines = [
        f"n={instance.n} d={instance.d} delta={delta:g} ordering={list(instance.ordering)}",
        f"pair_H      {_fmt(rep.pair_H)}",
        f"ranking_H   {' '.join(_fmt(h) for h in rep.ranking_H)}",
        f"best_G      {' '.join(_fmt(g) for g in rep.best_G)}",
        f"lb_two      {_fmt(rep.lb_two)}",
        f"lb_ranking  {_fmt(rep.lb_ranking)}",
        f"lb_best     {_fmt(rep.lb_best)}",
    ]
    sp = rep.top_pair_sparsity
    if sp is not None:
        lines.append(f"s*={sp.s_star} x*={sp.x_star:.6g} delta*^2={sp.delta_star_sq:.6g}")
    return "\n".join(lines) + "\n"


# output

def records_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def records_json(records: Sequence[RunRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=1) + "\n"


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def sweep_svg(result: SweepResult, width: int = 640, height: int = 400) -> str:
    """Single-panel line chart of mean queries (log scale) against the sweep axis."""
    left, right, top, bottom = 70, 120, 20, 50
    pw, ph = width - left - right, height - top - bottom
    xs = sorted({r.value for r in result.rows})
    ys = [r.mean_queries for r in result.rows if r.mean_queries > 0]
    x0, x1 = xs[0], xs[-1]
    if x1 == x0:
        x1 = x0 + 1.0
    lo = math.floor(math.log10(min(ys))) if ys else 0
    hi = math.ceil(math.log10(max(ys))) if ys else 1
    if hi == lo:
        hi = lo + 1

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (math.log10(y) - lo) / (hi - lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    for k in range(lo, hi + 1):
        y = py(10.0 ** k)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">1e{k}</text>')
    for x in xs:
        out.append(f'<text x="{px(x):.2f}" y="{top + ph + 16}" text-anchor="middle">{x:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{result.axis}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">mean queries</text>')
    for i, algo in enumerate(result.algorithms):
        color = _COLORS[i % len(_COLORS)]
        vx, vy = result.series(algo)
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(vx, vy) if y > 0)
        out.append(f'<polyline class="series" data-algo="{algo}" fill="none" stroke="{color}" '
                   f'stroke-width="2" points="{pts}"/>')
        for x, y in zip(vx, vy):
            if y > 0:
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly}">{algo}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(data: SweepResult | Sequence[RunRecord], fmt: str) -> str:
    records = data.records if isinstance(data, SweepResult) else list(data)
    if not records:
        raise ConfigError("nothing to emit: no records")
    if fmt == "csv":
        return records_csv(records)
    if fmt == "json":
        return records_json(records)
    if fmt == "svg":
        if not isinstance(data, SweepResult):
            raise ConfigError("svg output needs a sweep table")
        return sweep_svg(data)
    raise ConfigError(f"unknown format {fmt!r}")


def emit(data: SweepResult | Sequence[RunRecord], fmt: str, path) -> Path:
    """Write records or a sweep as csv, json or svg; nothing is written on error."""
    text = render(data, fmt)
    path = Path(path)
    path.write_text(text)
    return path


def table_text(result: SweepResult) -> str:
    lines = [f"{result.axis:>8} {'d':>4} {'s':>4} {'algo':>6} {'mean_queries':>14} {'correct':>8}"]
    for r in sorted(result.rows, key=lambda r: (r.value, r.algo)):
        lines.append(f"{r.value:8.3g} {r.d:4d} {r.s:4d} {r.algo:>6} {r.mean_queries:14.6g} "
                     f"{r.correct:4d}/{r.reps:<3d}")
    return "\n".join(lines) + "\n"


# config files

_INT_KEYS = {"n", "d", "s", "replications", "seed", "budget_cap"}
_FLOAT_KEYS = {"delta", "epsilon"}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` and ``;`` start comments."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for key, raw in cp["experiment"].items():
        if key == "reps":
            key = "replications"
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _INT_KEYS:
                out[key] = None if raw.lower() in ("", "none") else int(float(raw))
            elif key in _FLOAT_KEYS:
                out[key] = float(raw)
            elif key == "gaps":
                out[key] = tuple(float(g) for g in raw.replace(",", " ").split())
            else:
                out[key] = raw
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return out


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values = parse_config_text(text)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})

