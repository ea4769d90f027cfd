"""Command-line harness.

Subcommands:
  generate  synthesize a scenario file
  solve     run one algorithm on a scenario, write front CSV (+ run log)
  compare   merged-reference comparison of several fronts + fixed anchors
  metrics   HV/RHV report for a set of front files
  sweep     p_crossover x p_mutation grid runs of the engine

Every output is reproducible from flags and seeds alone: no timestamps, no
wall-clock entropy. Exit codes: 0 success, 1 data/runtime error, 2 usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .heuristics import knapsack_front, pagerank_constructive
from .metrics import (
    FrontPoint,
    MetricError,
    default_box,
    hypervolume,
    merge_nondominated,
    read_front_csv,
    relative_hypervolume,
    write_front_csv,
    write_metrics_csv,
    write_run_log_csv,
)
from .nsga2 import EaConfig, run
from .objectives import GenomeError
from .scenario import (
    APPLICATION_IDS,
    TRAFFIC_PATTERNS,
    apply_traffic_pattern,
    build_scenario,
    generate_instance,
    load_scenario,
)
from .validation import SchemaError, ValidationError


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Flag value parsers
# ---------------------------------------------------------------------------


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def parse_seeds(text: str) -> list[int]:
    """Seed lists: '7', '1,2,3', or the inclusive range form '1..30'."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"seed range {text!r} is empty")
        return list(range(lo, hi + 1))
    seeds = [int(part) for part in text.split(",") if part.strip() != ""]
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def parse_grid(text: str) -> list[float]:
    """Budget grids: 'lo:hi:step' (inclusive of hi when it lands on a step)
    or a comma list of values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be lo:hi:step")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ValueError(f"grid {text!r} is empty")
        values = []
        v = lo
        while v <= hi + 1e-9:
            values.append(round(v, 6))
            v += step
        return values
    values = [float(p) for p in text.split(",") if p.strip() != ""]
    if not values:
        raise ValueError("no grid values given")
    return values


def parse_float_list(text: str) -> list[float]:
    values = [float(p) for p in text.split(",") if p.strip() != ""]
    if not values:
        raise ValueError("no values given")
    return values


def _write_manifest(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_manifest(front_path: Path) -> dict:
    sidecar = front_path.parent / "manifest.json"
    if sidecar.exists():
        try:
            with open(sidecar, "r", encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError):
            return {}
    return {}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    network = generate_instance(args.segments, seed=args.seed)
    network = apply_traffic_pattern(network, args.pattern, args.seed)
    name = args.name or Path(args.out).stem
    scenario = build_scenario(
        network,
        application=args.application,
        traffic_pattern=args.pattern,
        seed=args.seed,
        meta={"name": name, "generator": {"segments": args.segments, "seed": args.seed}},
    )
    from .scenario import save_scenario

    save_scenario(scenario, args.out)
    print(f"wrote {args.out}: {scenario.n_segments} segments, pattern={args.pattern}")
    return 0


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    label = args.label or args.algo
    manifest = {
        "command": "solve",
        "algorithm": args.algo,
        "scenario": str(args.scenario),
        "qos_mode": args.qos_mode,
        "label": label,
        "run": args.seed,
    }

    if args.algo == "nsga2":
        config = EaConfig(
            population_size=args.population,
            generations=args.generations,
            p_crossover=args.pc,
            p_mutation_per_gene=args.pm,
            qos_mode=args.qos_mode,
            seed=args.seed,
            workers=args.workers,
        )
        front, history = run(scenario, config)
        points = list(front.points)
        write_run_log_csv(out_dir / "run_log.csv", history)
        manifest["config"] = asdict(config)
    elif args.algo == "pagerank":
        # Deterministic: the seed flag is recorded but plays no role.
        _, trace = pagerank_constructive(scenario, qos_mode=args.qos_mode)
        points = merge_nondominated(trace)
        manifest["run"] = 0
    else:  # knapsack
        if not args.budget_grid:
            raise UsageError("solve --algo knapsack requires --budget-grid")
        grid = parse_grid(args.budget_grid)
        seeds = parse_seeds(args.seeds)
        points = knapsack_front(scenario, grid, seeds, qos_mode=args.qos_mode)
        manifest["budget_grid"] = grid
        manifest["seeds"] = seeds

    write_front_csv(out_dir / "front.csv", points)
    _write_manifest(out_dir / "manifest.json", manifest)
    print(f"wrote {out_dir / 'front.csv'}: {len(points)} points ({label})")
    return 0


def _load_labeled_fronts(paths: list[str]) -> list[tuple[str, str, object, list[FrontPoint]]]:
    """Returns (label, instance, run, points) per front file."""
    out = []
    for path_s in paths:
        path = Path(path_s)
        manifest = _read_manifest(path)
        label = manifest.get("label") or manifest.get("algorithm") or path.stem
        instance = Path(str(manifest.get("scenario", ""))).stem or "-"
        run_id = manifest.get("run", 0)
        points = read_front_csv(path, source=label)
        if not points:
            raise MetricError(f"{path}: empty front file")
        out.append((label, instance, run_id, points))
    return out


def cmd_metrics(args) -> int:
    fronts = _load_labeled_fronts(args.fronts)
    if args.reference:
        reference = read_front_csv(args.reference, source="reference")
        if not reference:
            raise MetricError(f"{args.reference}: empty front file")
    else:
        reference = merge_nondominated([p for _, _, _, pts in fronts for p in pts])
    all_points = [p for _, _, _, pts in fronts for p in pts] + list(reference)
    box = default_box(all_points)
    rows = []
    for label, instance, run_id, pts in fronts:
        if args.instance:
            instance = args.instance
        hv = hypervolume(merge_nondominated(pts), box)
        rhv = relative_hypervolume(merge_nondominated(pts), reference, box)
        rows.append((instance, label, run_id, hv, rhv, len(merge_nondominated(pts))))
    write_metrics_csv(args.out, rows)
    print(f"wrote {args.out}: {len(rows)} fronts scored")
    return 0


def cmd_compare(args) -> int:
    if len(args.fronts) < 2:
        raise UsageError("compare needs at least 2 front files")
    fronts = _load_labeled_fronts(args.fronts)
    all_points = [p for _, _, _, pts in fronts for p in pts]
    reference = merge_nondominated(all_points)
    box = default_box(all_points)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    table: dict[str, dict] = {}
    for label, instance, run_id, pts in fronts:
        if args.instance:
            instance = args.instance
        front = merge_nondominated(pts)
        hv = hypervolume(front, box)
        rhv = relative_hypervolume(front, reference, box)
        rows.append((instance, label, run_id, hv, rhv, len(front)))
        table[label] = {"hv": hv, "rhv": rhv, "front_size": len(front)}
        print(f"{label}: hv={hv:.6f} rhv={rhv:.6f} points={len(front)}")
    write_metrics_csv(out_dir / "comparison.csv", rows)

    fixed_cost = {}
    for anchor in args.fixed_cost:
        per_algo = {}
        for label, _, _, pts in fronts:
            feasible = [p.qos for p in pts if p.cost <= anchor]
            per_algo[label] = {
                "qos": max(feasible) if feasible else 0.0,
                "feasible": bool(feasible),
            }
            if not feasible:
                per_algo[label]["flag"] = "no feasible point"
        fixed_cost[repr(float(anchor))] = per_algo
    fixed_qos = {}
    for anchor in args.fixed_qos:
        per_algo = {}
        for label, _, _, pts in fronts:
            feasible = [p.cost for p in pts if p.qos >= anchor]
            per_algo[label] = {
                "cost": min(feasible) if feasible else None,
                "feasible": bool(feasible),
            }
            if not feasible:
                per_algo[label]["flag"] = "no feasible point"
        fixed_qos[repr(float(anchor))] = per_algo

    report = {
        "instance": args.instance or "-",
        "algorithms": table,
        "fixed_cost": fixed_cost,
        "fixed_qos": fixed_qos,
    }
    _write_manifest(out_dir / "report.json", report)
    print(f"wrote {out_dir / 'comparison.csv'} and {out_dir / 'report.json'}")
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    seeds = parse_seeds(args.seeds)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for pc in args.pc:
        for pm in args.pm:
            for seed in seeds:
                config = EaConfig(
                    population_size=args.population,
                    generations=args.generations,
                    p_crossover=pc,
                    p_mutation_per_gene=pm,
                    qos_mode=args.qos_mode,
                    seed=seed,
                    workers=args.workers,
                )
                front, history = run(scenario, config)
                last = history[-1]
                rows.append((pc, pm, seed, last.hv, len(front.points), last.evals))
                print(f"pc={pc} pm={pm} seed={seed}: hv={last.hv:.6f}")
    import csv as _csv

    with open(out_dir / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["pc", "pm", "seed", "hv", "front_size", "evals"])
        for pc, pm, seed, hv, fs, evals in rows:
            w.writerow([repr(float(pc)), repr(float(pm)), seed, repr(float(hv)), fs, evals])
    _write_manifest(
        out_dir / "manifest.json",
        {
            "command": "sweep",
            "scenario": str(args.scenario),
            "qos_mode": args.qos_mode,
            "pc": list(args.pc),
            "pm": list(args.pm),
            "seeds": seeds,
            "generations": args.generations,
            "population": args.population,
        },
    )
    print(f"wrote {out_dir / 'sweep.csv'}: {len(rows)} runs")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsudeploy",
        description="Bi-objective roadside-unit deployment planning toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a scenario file")
    p.add_argument("--segments", type=positive_int, required=True)
    p.add_argument("--pattern", choices=TRAFFIC_PATTERNS, default="normal")
    p.add_argument("--application", choices=APPLICATION_IDS, default="video")
    p.add_argument("--seed", type=nonnegative_int, default=0)
    p.add_argument("--name", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run one algorithm, write front + log")
    p.add_argument("--scenario", required=True)
    p.add_argument("--algo", choices=("nsga2", "pagerank", "knapsack"), required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=nonnegative_int, default=0)
    p.add_argument("--qos-mode", choices=("literal", "capped"), default="literal")
    p.add_argument("--label", default=None)
    p.add_argument("--generations", type=nonnegative_int, default=200)
    p.add_argument("--population", type=positive_int, default=72)
    p.add_argument("--pc", type=float, default=0.7)
    p.add_argument("--pm", type=float, default=0.1)
    p.add_argument("--workers", type=positive_int, default=1)
    p.add_argument("--budget-grid", default=None, help="knapsack: lo:hi:step or comma list")
    p.add_argument("--seeds", default="0", help="knapsack: e.g. 1..30 or 1,2,3")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="merged-reference comparison of fronts")
    p.add_argument("--fronts", nargs="+", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--instance", default=None)
    p.add_argument("--fixed-cost", type=parse_float_list, default=[10000.0, 15000.0])
    p.add_argument("--fixed-qos", type=parse_float_list, default=[2500.0])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("metrics", help="HV/RHV table for front files")
    p.add_argument("--fronts", nargs="+", required=True)
    p.add_argument("--reference", default=None)
    p.add_argument("--instance", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep", help="pc x pm parameter grid")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--pc", type=parse_float_list, default=[0.6, 0.7, 0.8])
    p.add_argument("--pm", type=parse_float_list, default=[0.05, 0.1, 0.2])
    p.add_argument("--seeds", default="0..2")
    p.add_argument("--generations", type=nonnegative_int, default=50)
    p.add_argument("--population", type=positive_int, default=72)
    p.add_argument("--qos-mode", choices=("literal", "capped"), default="literal")
    p.add_argument("--workers", type=positive_int, default=1)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, SchemaError, MetricError, GenomeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
