"""Command-line entry points.

Subcommands:
  run           execute one experiment from a JSON config, write run + summary CSV
  sweep         execute a parameter sweep from a JSON config
  gen-instance  generate a planted max-cut / bipartition instance file
  bound         evaluate the restart-scheme expected-runtime bound
  recommend-b   print the recommended budget factor for a kernel
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import RngStream
from .graphs import planted_maxcut, save_instance
from .harness import (
    ConfigError,
    ExperimentSpec,
    SweepSpec,
    run_experiment,
    run_sweep,
    summarize,
    write_runs_csv,
    write_summary_csv,
)
from .restarts import recommended_budget_factor, restart_runtime_bound


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def _write_outputs(records, rows, output: str) -> tuple[Path, Path]:
    runs_path = Path(f"{output}.runs.csv")
    summary_path = Path(f"{output}.summary.csv")
    write_runs_csv(records, runs_path)
    write_summary_csv(rows, summary_path)
    return runs_path, summary_path


def cmd_run(args) -> int:
    data = _load_json(args.config)
    spec = ExperimentSpec.from_dict(data)
    records = run_experiment(spec)
    rows = summarize(records)
    output = args.output or data.get("output")
    if output is None:
        raise ConfigError("no output path: set 'output' in the config or pass --output")
    runs_path, summary_path = _write_outputs(records, rows, output)
    print(f"wrote {runs_path} and {summary_path}")
    for row in rows:
        print(
            f"axis={row.axis} median={row.median} q1={row.q1} q3={row.q3} "
            f"successes={row.successes} censored={row.censored}"
        )
    return 0


def cmd_sweep(args) -> int:
    data = _load_json(args.config)
    sweep = SweepSpec.from_dict(data)
    records, rows = run_sweep(sweep)
    output = args.output or data.get("output")
    if output is None:
        raise ConfigError("no output path: set 'output' in the config or pass --output")
    runs_path, summary_path = _write_outputs(records, rows, output)
    print(f"wrote {runs_path} and {summary_path}")
    for row in rows:
        print(
            f"axis={row.axis} median={row.median} q1={row.q1} q3={row.q3} "
            f"successes={row.successes} censored={row.censored}"
        )
    return 0


def cmd_gen_instance(args) -> int:
    instance = planted_maxcut(args.n, args.cross_density, RngStream(args.seed))
    save_instance(instance, args.out)
    print(
        f"wrote {args.out}: {instance.graph.n_nodes} nodes, "
        f"{instance.graph.n_edges} edges, optimum {instance.optimal_value!r}"
    )
    return 0


def cmd_bound(args) -> int:
    value = restart_runtime_bound(args.p, args.U, args.b, args.mu_tilde, args.T)
    print(f"{value:.12g}")
    return 0


def cmd_recommend_b(args) -> int:
    value = recommended_budget_factor(
        args.kernel, args.n, eta=args.eta, rho=args.rho, variant=args.variant
    )
    print(f"{value:.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edabench",
        description="Univariate EDA benchmark harness with drift-aware restart schedulers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--output", help="output path prefix (overrides the config)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep from a JSON config")
    p_sweep.add_argument("--config", required=True, help="JSON sweep config")
    p_sweep.add_argument("--output", help="output path prefix (overrides the config)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_gen = sub.add_parser("gen-instance", help="generate a planted cut instance file")
    p_gen.add_argument("--n", type=int, required=True, help="number of nodes (even, >= 4)")
    p_gen.add_argument("--cross-density", type=float, default=0.5)
    p_gen.add_argument("--seed", type=int, default=1)
    p_gen.add_argument("--out", required=True, help="instance file to write")
    p_gen.set_defaults(func=cmd_gen_instance)

    p_bound = sub.add_parser("bound", help="evaluate the restart expected-runtime bound")
    p_bound.add_argument("--p", type=float, required=True, help="per-leg success probability")
    p_bound.add_argument("--U", type=float, required=True, help="update factor")
    p_bound.add_argument("--b", type=float, required=True, help="budget factor")
    p_bound.add_argument("--mu-tilde", type=float, required=True, help="parameter threshold")
    p_bound.add_argument("--T", type=float, required=True, help="per-unit time factor")
    p_bound.set_defaults(func=cmd_bound)

    p_rec = sub.add_parser("recommend-b", help="recommended budget factor for a kernel")
    p_rec.add_argument("--kernel", required=True, choices=["cga", "umda", "pbil"])
    p_rec.add_argument("--n", type=int, default=100, help="problem size (for 1/ln n factors)")
    p_rec.add_argument("--eta", type=float, help="selection pressure (pbil/umda)")
    p_rec.add_argument("--rho", type=float, help="learning rate (pbil)")
    p_rec.add_argument("--variant", choices=["aggressive", "conservative"], default="aggressive")
    p_rec.set_defaults(func=cmd_recommend_b)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
