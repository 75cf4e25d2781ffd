"""Command-line interface.

Subcommands: ``run`` (batch experiment with CSV/JSON export and an optional
regret figure), ``table1`` (the demo gap table), ``bounds`` (Monte-Carlo
verdicts for the tail-bound grid), ``front`` (Pareto front of an
environment's actions), and ``serve`` (the live elicitation service).

Exit status is 0 on success and 2 for configuration problems.  Figure
rendering and the HTTP stack are imported lazily so the quick table
commands stay quick.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import bound_value, default_validation_queries, mc_validate_bound, query_from_dict
from .environments import environment_from_dict
from .geometry import pareto_front
from .harness import experiment_config_from_dict, export, pareto_regret, run_experiment
from .preferences import gap_table
from .presets import (
    demo_action_set,
    demo_chebyshev_preference,
    demo_constraint_preference,
    demo_linear_preference,
)

__all__ = ["main", "build_parser"]

_DEMO_PREFERENCES = {
    "linear": demo_linear_preference,
    "econstraint": demo_constraint_preference,
    "chebyshev": demo_chebyshev_preference,
}


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must hold a JSON object, got {type(data).__name__}")
    return data


def _stdout_csv() -> "csv._writer":
    return csv.writer(sys.stdout, lineterminator="\n")


def cmd_run(args: argparse.Namespace) -> int:
    config = experiment_config_from_dict(_load_json(args.config))
    out = args.out if args.out is not None else config.output_dir
    if out is None:
        raise ValueError("no output directory: pass --out or set output_dir in the config")
    result = run_experiment(config)
    paths = export(result, out)
    if args.plot:
        from .report import render_regret_curves

        paths["figure"] = render_regret_curves(result.curves, Path(out) / "regret.png")
    for curve in result.curves:
        print(
            f"{curve.policy}: mean final regret {curve.mean_final_regret():.4f} "
            f"over {curve.repetitions} repetition(s)"
        )
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def cmd_table1(args: argparse.Namespace) -> int:
    preference = _DEMO_PREFERENCES[args.pref]()
    actions = demo_action_set()
    table = gap_table(preference, actions)
    writer = _stdout_csv()
    coord_names = [f"mean_{i + 1}" for i in range(actions.dimension)]
    writer.writerow(["action", *coord_names, "value", "gap"])
    for i, action in enumerate(actions):
        writer.writerow(
            [
                action.name,
                *(repr(v) for v in action.mean.values),
                repr(table.values[i]),
                repr(table.gaps[i]),
            ]
        )
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    data = _load_json(args.config) if args.config else {}
    n_trials = int(data.get("n_trials", 100_000))
    seed = int(data.get("seed", 0))
    if "queries" in data:
        queries = tuple(query_from_dict(entry) for entry in data["queries"])
    else:
        queries = default_validation_queries()
    rng = np.random.default_rng(seed)
    writer = _stdout_csv()
    writer.writerow(
        [
            "inequality",
            "variant",
            "dimension",
            "deviation",
            "sigma",
            "samples",
            "bound",
            "empirical",
            "holds",
        ]
    )
    for query in queries:
        verdict = mc_validate_bound(query, n_trials, rng)
        writer.writerow(
            [
                query.inequality.value,
                query.variant.value,
                query.dimension,
                repr(query.deviation),
                repr(query.sigma),
                query.samples,
                repr(verdict.bound),
                repr(verdict.empirical),
                "true" if verdict.holds else "false",
            ]
        )
    return 0


def cmd_front(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    env = environment_from_dict(data.get("environment", data))
    actions = env.actions
    front = pareto_front(actions)
    writer = _stdout_csv()
    coord_names = [f"mean_{i + 1}" for i in range(actions.dimension)]
    writer.writerow(["index", "action", *coord_names, "on_front", "pareto_regret"])
    for i, action in enumerate(actions):
        writer.writerow(
            [
                i,
                action.name,
                *(repr(v) for v in action.mean.values),
                "true" if i in front else "false",
                repr(pareto_regret(actions, i)),
            ]
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(store_path=args.store)
    uvicorn.run(app, host=args.bind, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobandit",
        description="Multi-objective bandit experiments, bounds, and elicitation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a batch experiment and export its results")
    run_p.add_argument("--config", required=True, help="experiment config JSON file")
    run_p.add_argument("--out", default=None, help="output directory (overrides the config)")
    run_p.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render the regret-curve figure next to the CSV",
    )
    run_p.set_defaults(handler=cmd_run)

    table_p = sub.add_parser("table1", help="print the demo gap table as CSV")
    table_p.add_argument(
        "--pref", required=True, choices=sorted(_DEMO_PREFERENCES), help="demo preference"
    )
    table_p.set_defaults(handler=cmd_table1)

    bounds_p = sub.add_parser(
        "bounds", help="print Monte-Carlo verdicts for the tail-bound grid as CSV"
    )
    bounds_p.add_argument(
        "--config",
        default=None,
        help="JSON file with n_trials, seed, and an optional query list",
    )
    bounds_p.set_defaults(handler=cmd_bounds)

    front_p = sub.add_parser("front", help="print the Pareto front of an environment")
    front_p.add_argument(
        "--config", required=True, help="environment (or experiment) config JSON file"
    )
    front_p.set_defaults(handler=cmd_front)

    serve_p = sub.add_parser("serve", help="run the live elicitation HTTP service")
    serve_p.add_argument("--bind", default="127.0.0.1", help="bind address")
    serve_p.add_argument("--port", type=int, default=8000, help="TCP port")
    serve_p.add_argument(
        "--store",
        default="elicit_sessions.jsonl",
        help="append-only session store file",
    )
    serve_p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
