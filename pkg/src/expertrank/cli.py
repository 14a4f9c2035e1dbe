"""Command line entry point: ``expertrank {simulate,sweep,bounds,instance}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .env import gen_chain_instance, gen_sparse_instance, format_matrix, read_matrix
from .errors import ExpertRankError
from .model import validate_instance

CLI_DEFAULT_CAP = 10**9


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, help="confidence parameter (default 0.1)")
    p.add_argument("--reps", type=int, help="replications per configuration (default 20)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--profile", choices=("paper", "ci"), help="algorithm constants profile")
    p.add_argument("--workers", type=int, default=1, help="worker processes for replications")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expertrank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run replications of one experiment")
    sim.add_argument("--config", type=Path, help="flat key = value experiment file")
    sim.add_argument("--mode", choices=harness.MODES)
    sim.add_argument("--algo", choices=harness.ALGORITHMS)
    sim.add_argument("--generator", choices=harness.GENERATORS)
    sim.add_argument("--matrix", help="matrix file (implies --generator file)")
    sim.add_argument("--n", type=int)
    sim.add_argument("--d", type=int)
    sim.add_argument("--s", type=int)
    sim.add_argument("--gaps", type=_floats, help="chain gaps, comma separated")
    sim.add_argument("--noise", choices=("gaussian_unit", "bernoulli", "noiseless"))
    sim.add_argument("--epsilon", type=float)
    sim.add_argument("--budget-cap", type=int, help=f"per-run query cap (default {CLI_DEFAULT_CAP:.0e})")
    _common(sim)

    sweep = sub.add_parser("sweep", help="sparsity or dimension sweep of the two-expert duel")
    kinds = sweep.add_subparsers(dest="kind", required=True)
    sp = kinds.add_parser("sparsity", help="s = 1..d at fixed d")
    sp.add_argument("--d", type=int, default=10)
    dm = kinds.add_parser("dimension", help="several d at a fixed sparsity rate")
    dm.add_argument("--rate", type=float, default=1 / 3)
    dm.add_argument("--dims", type=_ints, default=[4, 8, 16, 32, 64])
    for p in (sp, dm):
        p.add_argument("--algo", choices=(*harness.ALGORITHMS, "both"), default="both")
        _common(p)

    bounds = sub.add_parser("bounds", help="complexity quantities and lower bounds of an instance")
    _instance_args(bounds)
    bounds.add_argument("--delta", type=float, default=0.1)
    bounds.add_argument("--format", choices=("text", "json"), default="text")
    bounds.add_argument("--out", type=Path)

    inst = sub.add_parser("instance", help="generate an instance and write it in matrix format")
    _instance_args(inst)
    inst.add_argument("--out", type=Path)
    return parser


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matrix", help="matrix file")
    p.add_argument("--generator", choices=("sparse", "chain"), default="sparse")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--gaps", type=_floats, default=())
    p.add_argument("--seed", type=int, default=0)


def _load_instance(args):
    if args.matrix:
        return validate_instance(read_matrix(args.matrix))
    if args.generator == "chain":
        return gen_chain_instance(args.n, args.d, args.gaps)
    return gen_sparse_instance(args.d, args.s, args.seed)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _simulate(args) -> None:
    overrides = dict(
        mode=args.mode, algorithm=args.algo, generator=args.generator, n=args.n, d=args.d, s=args.s,
        gaps=args.gaps, noise=args.noise, delta=args.delta, epsilon=args.epsilon,
        replications=args.reps, seed=args.seed, budget_cap=args.budget_cap, profile=args.profile,
    )
    if args.matrix:
        overrides.update(generator="file", matrix_path=args.matrix)
    if args.config:
        cfg = harness.load_config(args.config, **overrides)
    else:
        cfg = harness.ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    if cfg.budget_cap is None and cfg.profile == "paper":
        cfg = harness.with_overrides(cfg, budget_cap=CLI_DEFAULT_CAP)
    records = harness.run_replications(cfg, args.workers)
    _write(harness.render(records, args.format), args.out)
    if args.out is not None:
        ok = sum(r.correct for r in records)
        mean = sum(r.queries for r in records) / len(records)
        print(f"{len(records)} runs, {ok} correct, mean queries {mean:.6g} -> {args.out}")


def _sweep(args) -> None:
    algos = harness.ALGORITHMS if args.algo == "both" else (args.algo,)
    common = dict(reps=args.reps or 20, delta=args.delta or 0.1, seed=args.seed or 0,
                  algorithms=algos, profile=args.profile or "paper", workers=args.workers)
    if args.kind == "sparsity":
        result = harness.sweep_sparsity(d=args.d, **common)
    else:
        result = harness.sweep_dimension(rate=args.rate, dims=args.dims, **common)
    _write(harness.render(result, args.format), args.out)
    if args.out is not None:
        sys.stdout.write(harness.table_text(result))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            _simulate(args)
        elif args.command == "sweep":
            _sweep(args)
        elif args.command == "bounds":
            _write(harness.report_bounds(_load_instance(args), args.delta, args.format), args.out)
        else:
            _write(format_matrix(_load_instance(args)), args.out)
    except (ExpertRankError, OSError) as exc:
        print(f"expertrank: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
