"""Command-line interface: simulate, train, run, evaluate, bench."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    evaluate_results,
    load_config,
    load_maps,
    run_bench,
    run_online,
    run_simulate,
    run_train,
)
from .models import load_dataset
from .ot_core import load_map


def _parse_int_list(text: str):
    return [int(v) for v in text.split(",") if v.strip()]


def _parse_str_list(text: str):
    return [v.strip() for v in text.split(",") if v.strip()]


def _collect_map_paths(spec: str):
    path = Path(spec)
    if path.is_dir():
        paths = sorted(path.glob("map_w*.json"))
        if not paths:
            raise FileNotFoundError(f"no map_w*.json files under {path}")
        return paths
    return [Path(p) for p in spec.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otddf", description="Data-driven transport-map filtering experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="record a trajectory dataset")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the dataset seed")

    p = sub.add_parser("train", help="train transport maps from a recorded dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--dataset", required=True, help="dataset CSV written by simulate")
    p.add_argument("--out", required=True)
    p.add_argument("--windows", type=_parse_int_list, default=None, help="comma-separated window sizes")

    p = sub.add_parser("run", help="run filters over fresh truth trajectories and score them")
    p.add_argument("--config", required=True)
    p.add_argument("--maps", default=None, help="directory of map_w*.json files or comma-separated paths")
    p.add_argument("--dataset", default=None, help="optional dataset CSV to draw truth trajectories from")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the online master seed")
    p.add_argument("--methods", type=_parse_str_list, default=None, help="comma-separated method subset")

    p = sub.add_parser("evaluate", help="recompute summary statistics from a results CSV")
    p.add_argument("--results", required=True, help="results.csv written by run")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="time the online step of each method")
    p.add_argument("--config", required=True)
    p.add_argument("--map", required=True, help="trained map JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--methods", type=_parse_str_list, default=None)
    p.add_argument("--steps", type=int, default=120, help="timed steps per method (>= 100)")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "simulate":
        path = run_simulate(load_config(args.config), args.out, seed=args.seed)
        print(f"wrote {path}")
        return 0

    if args.command == "train":
        config = load_config(args.config)
        dataset = load_dataset(args.dataset)
        maps = run_train(config, dataset, out_dir=args.out, windows=args.windows)
        print(f"trained {len(maps)} map(s) for windows {sorted(maps)} under {args.out}")
        return 0

    if args.command == "run":
        config = load_config(args.config)
        maps = load_maps(_collect_map_paths(args.maps)) if args.maps else {}
        dataset = load_dataset(args.dataset) if args.dataset else None
        _, summary = run_online(
            config, maps, out_dir=args.out, methods=args.methods, seed=args.seed, dataset=dataset
        )
        for method, stats in sorted(summary["per_method"].items()):
            parts = [
                f"{kind}={stats[f'{kind}_time_avg_mean']:.6g}"
                for kind in ("mse", "mmd")
                if f"{kind}_time_avg_mean" in stats
            ]
            print(f"{method}: " + (", ".join(parts) if parts else "no metrics"))
        return 0

    if args.command == "evaluate":
        summary = evaluate_results(args.results, Path(args.out) / "summary_recomputed.json")
        print(f"summarized {len(summary['per_method'])} method(s)")
        return 0

    if args.command == "bench":
        config = load_config(args.config)
        report = run_bench(config, load_map(args.map), out_dir=args.out, methods=args.methods, n_steps=args.steps)
        for method, sec in sorted(report.step_seconds.items()):
            print(f"{method}: {sec:.6f} s/step over {report.step_counts[method]} steps")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
