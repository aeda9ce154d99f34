"""Command line entry point: ``qees run | sweep | plot``.

Exit codes: 0 success, 1 runtime failure, 2 bad configuration or inputs.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import plotting
from .config import load_config
from .core import GenerationRecord
from .errors import ConfigError, QEESError, CheckpointError
from .runner import read_records_csv, run_experiment

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _progress(prefix: str = ""):
    start = time.perf_counter()

    def report(rec: GenerationRecord) -> None:
        print(
            f"{prefix}gen {rec.generation:5d}  mean_f {rec.mean_fitness: .4f}  max_f {rec.max_fitness: .4f}  "
            f"center_f {rec.center_fitness: .4f}  evo {rec.mean_evolvability:.4f}  "
            f"t {time.perf_counter() - start:.1f}s",
            flush=True,
        )

    return report


def cmd_run(config_path, run_seed: int, output_dir, workers: int = 1, resume=None, generations=None) -> int:
    overrides = dict(run_seed=run_seed, output_dir=str(output_dir), workers=workers)
    if generations is not None:
        overrides["generations"] = generations
    try:
        cfg = load_config(config_path, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(cfg, resume=resume, progress=_progress())
    except (ConfigError, CheckpointError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QEESError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"done: {len(result.records)} generations, final center fitness {result.final_center_fitness:.4f}")
    return EXIT_OK


def parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"seeds must be comma-separated integers, got {text!r}", field="--seeds") from None
    if not seeds:
        raise ConfigError("at least one seed is required", field="--seeds")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("duplicate seeds", field="--seeds")
    if any(s < 0 for s in seeds):
        raise ConfigError("seeds must be non-negative", field="--seeds")
    return seeds


def cmd_sweep(config_path, seeds, output_dir, workers: int = 1) -> int:
    try:
        seed_list = parse_seeds(seeds) if isinstance(seeds, str) else parse_seeds(",".join(map(str, seeds)))
        load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_seed = []
    failed = []
    for s in seed_list:
        run_dir = out / f"seed_{s}"
        print(f"== seed {s} -> {run_dir}", flush=True)
        code = cmd_run(config_path, s, run_dir, workers)
        if code != EXIT_OK:
            print(f"seed {s} failed (exit {code}); skipping", file=sys.stderr)
            failed.append(s)
            continue
        per_seed.append(read_records_csv(run_dir / "records.csv"))
    if per_seed:
        plotting.write_aggregate_csv(plotting.aggregate_records(per_seed), out / "aggregate.csv")
    if failed:
        print(f"{len(failed)} of {len(seed_list)} seeds failed: {failed}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _trap_for(input_dir: Path):
    cfg_path = input_dir / "config.cfg"
    if not cfg_path.exists():
        seeds = sorted(input_dir.glob("seed_*/config.cfg"))
        if not seeds:
            return None
        cfg_path = seeds[0]
    try:
        return load_config(cfg_path).environment.trap
    except ConfigError:
        return None


def cmd_plot(input_dir, kind: str, out_path, bins: int = 50, metrics=("mean_fitness",)) -> int:
    inp = Path(input_dir)
    if kind == "curve":
        agg = inp / "aggregate.csv"
        if agg.exists():
            rows = plotting.read_aggregate_csv(agg)
        elif (inp / "records.csv").exists():
            rows = plotting.aggregate_records([read_records_csv(inp / "records.csv")])
        else:
            print(f"missing input: {agg} (or records.csv)", file=sys.stderr)
            return EXIT_CONFIG
        try:
            plotting.plot_curves(rows, list(metrics), out_path, title=inp.name)
        except ValueError as exc:
            print(f"plot error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    if kind == "histogram":
        beh = inp / "behaviors.csv"
        if not beh.exists():
            print(f"missing input: {beh}", file=sys.stderr)
            return EXIT_CONFIG
        if bins <= 0:
            print("--bins must be positive", file=sys.stderr)
            return EXIT_CONFIG
        counts, _, _ = plotting.plot_histogram(plotting.read_behaviors(beh), out_path, bins=bins, trap=_trap_for(inp))
        print(f"histogram: {int(counts.sum())} positions in {bins}x{bins} bins")
        return EXIT_OK
    print(f"unknown plot kind {kind!r}", file=sys.stderr)
    return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qees", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one seed of a config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--resume", help="continue from a checkpoint file")
    run.add_argument("--generations", type=int, help="override the configured generation count")

    sweep = sub.add_parser("sweep", help="run several seeds and aggregate")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--seeds", required=True, help="comma-separated, e.g. 0,1,2")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=1)

    plot = sub.add_parser("plot", help="render learning curves or a final-position histogram")
    plot.add_argument("--in", dest="input_dir", required=True)
    plot.add_argument("--kind", choices=("curve", "histogram"), required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--bins", type=int, default=50)
    plot.add_argument("--metrics", default="mean_fitness", help="comma-separated record columns for curves")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        if args.workers < 1:
            print("--workers must be at least 1", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_run(args.config, args.seed, args.out, args.workers, args.resume, args.generations)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.seeds, args.out, args.workers)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    return cmd_plot(args.input_dir, args.kind, args.out, args.bins, metrics)


if __name__ == "__main__":
    sys.exit(main())
