"""Command-line entry point: ``invbandit <subcommand> ...``.

Exit status is 0 on success, 1 for invalid input or configuration and 2 for
I/O failures.  Diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .analysis import theoretical_curves
from .core import BanditInstance, RewardModel, make_instance
from .datasets import load_arm_table, normalize_affine, normalize_max, subsample_arms
from .demonstrators import DemonstratorConfig, Trajectory, simulate
from .errors import ConfigError, InverseBanditError
from .estimators import (
    NaiveEstimatorConfig,
    estimate_naive,
    estimate_sae,
    estimate_ucb,
)
from .harness import ExperimentConfig, run_experiment

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def cmd_simulate(args) -> int:
    if args.config:
        data = _read_json(args.config)
        instance = BanditInstance.from_dict(data["instance"])
        demo = DemonstratorConfig(data["algorithm"], float(data.get("alpha", 0.0)), int(data["T"]),
                                  float(data.get("width_scale", 1.0)), data.get("etc_exploration_rounds"))
        seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    else:
        if args.means is None or args.T is None:
            raise ConfigError("simulate needs --config or both --means and --T")
        model = RewardModel(args.model, args.variance)
        instance = make_instance(args.means, model)
        demo = DemonstratorConfig(args.algorithm, args.alpha, args.T, args.width_scale,
                                  args.etc_rounds)
        seed = args.seed or 0
    trajectory = simulate(instance, demo, seed)
    _emit(trajectory.to_json(include_rewards=args.include_rewards) + "\n", args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    trajectory = Trajectory.from_dict(_read_json(args.trajectory))
    if args.estimator == "procedure_sae":
        report = estimate_sae(trajectory, args.mu_star, force=args.force)
    elif args.estimator == "procedure_ucb":
        report = estimate_ucb(trajectory, args.mu_star, force=args.force)
    else:
        report = estimate_naive(trajectory, args.mu_star, NaiveEstimatorConfig(args.c0))
    if args.out is None:
        sys.stdout.write(report.to_csv())
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = ExperimentConfig.load(args.config)
    if args.seed is not None or args.force:
        data = _read_json(args.config)
        if args.seed is not None:
            data["master_seed"] = args.seed
        if args.force:
            data["force"] = True
        config = ExperimentConfig.from_dict(data, base_dir=Path(args.config).parent)
    table = run_experiment(config, threads=max(1, args.threads))
    paths = table.write(args.out)
    if table.warnings:
        print(f"warning: {len(table.warnings)} grid cell(s) fall outside the estimation "
              f"precondition; see {paths['metadata']}", file=sys.stderr)
    print(f"wrote {paths['results']} ({len(table.rows)} rows)", file=sys.stderr)
    return EXIT_OK


def cmd_ingest(args) -> int:
    table = load_arm_table(args.table)
    if args.subsample:
        table = subsample_arms(table, args.subsample, args.seed or 0, args.pin or ())
    if args.normalization == "max":
        if args.mu_max is None or args.sigma_raw is None:
            raise ConfigError("max normalization needs --mu-max and --sigma-raw")
        instance = normalize_max(table, args.mu_max, args.sigma_raw)
    else:
        if args.variance_raw is None:
            raise ConfigError("affine normalization needs --variance-raw")
        instance = normalize_affine(table, args.variance_raw)
    data = instance.to_dict()
    data["arm_ids"] = list(table.arm_ids)
    _emit(json.dumps(data) + "\n", args.out)
    return EXIT_OK


def cmd_curves(args) -> int:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "T", "gap", "kappa", "pulls_lo", "pulls_hi", "regret_ub",
                     "minimax_lb", "tradeoff"])
    for alpha in args.alpha:
        for horizon in args.T:
            for gap in args.gap:
                c = theoretical_curves(alpha, horizon, gap)
                writer.writerow([repr(alpha), horizon, repr(gap), repr(c.kappa),
                                 repr(c.pull_sandwich[0]), repr(c.pull_sandwich[1]),
                                 repr(c.regret_ub), repr(c.minimax_lb), repr(c.tradeoff)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invbandit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one demonstrator and write its trajectory as JSON")
    p.add_argument("--config", help="JSON with instance, algorithm, alpha, T, width_scale")
    p.add_argument("--means", type=float, nargs="+")
    p.add_argument("--model", default="gaussian", choices=["gaussian", "bernoulli", "deterministic"])
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--algorithm", default="UCB", type=str.upper, choices=["SAE", "UCB", "ETC"])
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--T", type=int)
    p.add_argument("--width-scale", type=float, default=1.0)
    p.add_argument("--etc-rounds", type=int)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--include-rewards", action="store_true", help="also write the hidden rewards")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate arm means from a trajectory JSON")
    p.add_argument("trajectory")
    p.add_argument("--mu-star", type=float, required=True)
    p.add_argument("--estimator", default="procedure_ucb",
                   choices=["procedure_sae", "procedure_ucb", "naive"])
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--force", action="store_true", help="skip the demonstrator tag check")
    p.add_argument("--out", help="directory for report.csv and report.json (default: CSV to stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=_u64, help="override master_seed")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1, help="worker threads (never changes output)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("ingest", help="normalize an arm_id,mean,std table into an instance JSON")
    p.add_argument("table")
    p.add_argument("--normalization", choices=["max", "affine"], default="max")
    p.add_argument("--mu-max", type=float)
    p.add_argument("--sigma-raw", type=float)
    p.add_argument("--variance-raw", type=float)
    p.add_argument("--subsample", type=int)
    p.add_argument("--pin", nargs="*")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("curves", help="reference curves (kappa, regret bound, lower bound)")
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0])
    p.add_argument("--T", type=int, nargs="+", required=True)
    p.add_argument("--gap", type=float, nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except InverseBanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (KeyError, TypeError) as exc:
        print(f"error: malformed input ({exc})", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
