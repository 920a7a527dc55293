"""Config-driven Monte Carlo runner producing per-run and aggregated tables.

Every ``(alpha, T, run)`` cell gets its own seed derived by hashing the
master seed with the cell coordinates, so the output does not depend on the
number of worker threads or on scheduling order.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _backend, _kernels
from .analysis import RunMetrics, aggregate, estimation_errors, kappa, pseudo_regret
from .core import BanditInstance, RewardModel, gap_profile, make_instance
from .datasets import fixture_path, load_arm_table, normalize_affine, normalize_max, subsample_arms
from .demonstrators import ALGORITHMS, DemonstratorConfig, simulate
from .errors import ConfigError, InverseBanditError
from .estimators import (
    NAIVE_C0_GRID,
    NaiveEstimatorConfig,
    estimate_naive,
    estimate_sae,
    estimate_ucb,
)

RESULT_COLUMNS = ("algorithm", "estimator", "alpha", "T", "beta", "run_id", "arm", "true_mean",
                  "estimate", "abs_error", "regret", "pulls", "tau")
AGGREGATE_COLUMNS = ("algorithm", "estimator", "alpha", "T", "arm", "n_runs", "mean_abs_error",
                     "mse", "stderr", "mean_regret")
ESTIMATORS = ("procedure_sae", "procedure_ucb", "naive")
# T >= 16 * sum(kappa_i) is the weaker of the two stated estimation preconditions
PRECONDITION_FACTOR = 16.0


def derive_seed(master_seed: int, alpha: float, horizon: int, run: int, beta=None) -> int:
    """64-bit seed for one cell, a BLAKE2b hash of the cell coordinates."""
    key = f"{int(master_seed)}|{float(alpha)!r}|{int(horizon)}|{int(run)}|{beta!r}"
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


def log_spaced_horizons(lo: int, hi: int, n: int) -> tuple:
    values = np.rint(np.geomspace(lo, hi, n)).astype(int)
    return tuple(sorted(set(int(v) for v in values)))


def gap_schedule_instance(horizon: int, beta: float, model: RewardModel) -> BanditInstance:
    """Two arms ``(1, 1 - T^-beta)``."""
    return make_instance([1.0, 1.0 - horizon ** (-beta)], model)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _instance_from_source(source: dict, base_dir: Path | None) -> BanditInstance:
    if "means" in source:
        return make_instance(source["means"], RewardModel.from_dict(source.get("model", {"type": "gaussian"})))
    if "dataset" in source:
        ds = source["dataset"]
        if str(ds["path"]).startswith("fixture:"):
            path = fixture_path(str(ds["path"])[len("fixture:"):])
        else:
            path = Path(ds["path"])
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        table = load_arm_table(path)
        if ds.get("subsample"):
            table = subsample_arms(table, int(ds["subsample"]), int(ds.get("seed", 0)),
                                   ds.get("pinned", ()))
        mode = ds.get("normalization", "max")
        if mode == "max":
            return normalize_max(table, float(ds["mu_max"]), float(ds["sigma_raw"]))
        if mode == "affine":
            return normalize_affine(table, float(ds["variance_raw"]))
        raise ConfigError(f"unknown normalization {mode!r}")
    raise ConfigError("instance needs either 'means' or 'dataset'")


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    alpha_grid: tuple
    horizon_grid: tuple
    instance: BanditInstance | None = None
    estimators: tuple = ("procedure_ucb",)
    naive_c0: tuple = NAIVE_C0_GRID
    replications: int = 100
    master_seed: int = 0
    beta: float | None = None
    width_scale: float = 1.0
    force: bool = False
    etc_exploration_rounds: int | None = None
    model: RewardModel = field(default_factory=RewardModel)

    def __post_init__(self):
        object.__setattr__(self, "algorithm", str(self.algorithm).upper())
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        object.__setattr__(self, "horizon_grid", tuple(int(t) for t in self.horizon_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "naive_c0", tuple(float(c) for c in self.naive_c0))
        if not self.alpha_grid or not self.horizon_grid:
            raise ConfigError("alpha_grid and horizon_grid must be non-empty")
        if any(not 0.0 <= a < 1.0 for a in self.alpha_grid):
            raise ConfigError("every alpha must lie in [0, 1)")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        for name in self.estimators:
            if name not in ESTIMATORS:
                raise ConfigError(f"unknown estimator {name!r}; expected one of {ESTIMATORS}")
            procedure_of = {"procedure_sae": "SAE", "procedure_ucb": "UCB"}.get(name)
            if procedure_of and procedure_of != self.algorithm and not self.force:
                raise ConfigError(f"{name} on a {self.algorithm} demonstrator requires force")
        if "naive" in self.estimators:
            for c in self.naive_c0:
                NaiveEstimatorConfig(c)
        if self.beta is not None:
            if not 0.0 < self.beta <= 0.5:
                raise ConfigError("beta must lie in (0, 0.5]")
        elif self.instance is None:
            raise ConfigError("an instance or a gap schedule is required")
        if not self.width_scale > 0:
            raise ConfigError("width_scale must be > 0")
        for inst in self._instances():
            if inst.n_arms < 2:
                raise ConfigError("estimation experiments need K >= 2")
            if not inst.unique_best:
                raise ConfigError("the instance must have a unique best arm")
            if min(self.horizon_grid) < inst.n_arms:
                raise ConfigError("every horizon must be >= K")

    def _instances(self):
        if self.beta is None:
            return [self.instance]
        return [gap_schedule_instance(t, self.beta, self.model) for t in self.horizon_grid]

    def instance_for(self, horizon: int) -> BanditInstance:
        if self.beta is None:
            return self.instance
        return gap_schedule_instance(horizon, self.beta, self.model)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        try:
            horizons = data.pop("horizon_grid")
            if isinstance(horizons, dict):
                lo, hi, n = horizons["logspace"]
                horizons = log_spaced_horizons(int(lo), int(hi), int(n))
            instance = None
            if "instance" in data:
                instance = _instance_from_source(data.pop("instance"), base_dir)
            schedule = data.pop("gap_schedule", None)
            beta = schedule["beta"] if isinstance(schedule, dict) else schedule
            model = RewardModel.from_dict(data.pop("model", {"type": "gaussian", "variance": 1.0}))
            width_scale = data.pop("width_scale", 1.0)
            if isinstance(width_scale, str):
                width_scale = _parse_width_scale(width_scale, instance or model)
            return cls(
                algorithm=data.pop("algorithm"),
                alpha_grid=data.pop("alpha_grid"),
                horizon_grid=horizons,
                instance=instance,
                estimators=tuple(data.pop("estimators", ("procedure_ucb",))),
                naive_c0=tuple(data.pop("naive_c0", NAIVE_C0_GRID)),
                replications=int(data.pop("replications", 100)),
                master_seed=int(data.pop("master_seed", 0)),
                beta=None if beta is None else float(beta),
                width_scale=float(width_scale),
                force=bool(data.pop("force", False)),
                etc_exploration_rounds=data.pop("etc_exploration_rounds", None),
                model=model,
            )
        except KeyError as exc:
            raise ConfigError(f"config is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InverseBanditError):
                raise
            raise ConfigError(f"malformed config: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        with path.open(encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, base_dir=path.parent)


def _parse_width_scale(text: str, source) -> float:
    """Accept ``"<c>sigma"`` meaning ``c`` times the instance's reward std."""
    text = text.strip().lower()
    if not text.endswith("sigma"):
        raise ConfigError(f"cannot parse width_scale {text!r}")
    factor = float(text[: -len("sigma")] or 1.0)
    model = source.reward_model if isinstance(source, BanditInstance) else source
    return factor * model.sigma


@dataclass
class ResultTable:
    rows: list
    aggregates: dict  # (estimator, alpha, T) -> AggregateMetrics
    config: ExperimentConfig
    warnings: list = field(default_factory=list)

    def aggregate_rows(self) -> list:
        out = []
        for (est, alpha, horizon), agg in self.aggregates.items():
            for arm, a in sorted(agg.arms.items()):
                out.append({
                    "algorithm": self.config.algorithm, "estimator": est, "alpha": alpha,
                    "T": horizon, "arm": arm, "n_runs": a.n_runs,
                    "mean_abs_error": a.mean_abs_error, "mse": a.mse, "stderr": a.stderr,
                    "mean_regret": agg.mean_regret,
                })
        return out

    def metadata(self) -> dict:
        return {
            "generator_name": _kernels.GENERATOR_NAME,
            "gaussian_method": _kernels.GAUSSIAN_METHOD,
            "seed_derivation": "blake2b-64(master_seed|alpha|T|run|beta)",
            "version": __version__,
            "backend": _backend.BACKEND,
            "master_seed": self.config.master_seed,
            "replications": self.config.replications,
            "warnings": list(self.warnings),
        }

    @staticmethod
    def _csv(columns, rows) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
        return buf.getvalue()

    def results_csv(self) -> str:
        return self._csv(RESULT_COLUMNS, self.rows)

    def aggregate_csv(self) -> str:
        return self._csv(AGGREGATE_COLUMNS, self.aggregate_rows())

    def write(self, out_dir) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"results": out / "results.csv", "aggregate": out / "aggregate.csv",
                 "metadata": out / "metadata.json"}
        paths["results"].write_text(self.results_csv(), encoding="utf-8")
        paths["aggregate"].write_text(self.aggregate_csv(), encoding="utf-8")
        paths["metadata"].write_text(json.dumps(self.metadata(), indent=2) + "\n", encoding="utf-8")
        return paths


def _estimator_list(config: ExperimentConfig) -> list:
    out = []
    for name in config.estimators:
        if name == "naive":
            out.extend((f"naive_c0={c!r}", c) for c in config.naive_c0)
        else:
            out.append((name, None))
    return out


def _run_cell(config: ExperimentConfig, alpha: float, horizon: int, run: int):
    instance = config.instance_for(horizon)
    demo = DemonstratorConfig(config.algorithm, alpha, horizon, config.width_scale,
                              config.etc_exploration_rounds)
    seed = derive_seed(config.master_seed, alpha, horizon, run, config.beta)
    trajectory = simulate(instance, demo, seed)
    regret = pseudo_regret(instance, trajectory)
    mu_star = float(instance.means.max())
    pulls = {a: int(trajectory.pull_counts[a - 1]) for a in range(1, instance.n_arms + 1)}
    results = []
    for name, c0 in _estimator_list(config):
        if name == "procedure_sae":
            report = estimate_sae(trajectory, mu_star, force=config.force)
        elif name == "procedure_ucb":
            report = estimate_ucb(trajectory, mu_star, force=config.force)
        else:
            report = estimate_naive(trajectory, mu_star, NaiveEstimatorConfig(c0))
        errors = estimation_errors(instance, report)
        rows = []
        for arm in range(1, instance.n_arms + 1):
            entry = report.arms.get(arm)
            rows.append({
                "algorithm": config.algorithm, "estimator": name, "alpha": alpha, "T": horizon,
                "beta": config.beta, "run_id": run, "arm": arm,
                "true_mean": float(instance.means[arm - 1]),
                "estimate": entry.estimate if entry is not None else None,
                "abs_error": errors.get(arm),
                "regret": regret, "pulls": pulls[arm],
                "tau": entry.tau if entry is not None else None,
            })
        metrics = RunMetrics(regret, {a: errors.get(a) for a in pulls}, pulls)
        results.append((name, rows, metrics))
    return results


def _precondition_warnings(config: ExperimentConfig) -> list:
    out = []
    for alpha in config.alpha_grid:
        for horizon in config.horizon_grid:
            gaps = gap_profile(config.instance_for(horizon)).gaps
            total = sum(kappa(alpha, horizon, g) for g in gaps if g > 0)
            if horizon < PRECONDITION_FACTOR * total:
                out.append(f"alpha={alpha!r} T={horizon}: T < {PRECONDITION_FACTOR:g}*sum(kappa) "
                           f"= {PRECONDITION_FACTOR * total:.6g}; estimation guarantee not in force")
    return out


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ResultTable:
    cells = [(a, t, r) for a in config.alpha_grid for t in config.horizon_grid
             for r in range(1, config.replications + 1)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(lambda c: _run_cell(config, *c), cells))
    else:
        outputs = [_run_cell(config, *c) for c in cells]

    order = {name: i for i, (name, _) in enumerate(_estimator_list(config))}
    rows, metrics = [], {}
    for (alpha, horizon, _run), per_est in zip(cells, outputs):
        for name, est_rows, m in per_est:
            rows.extend(est_rows)
            metrics.setdefault((name, alpha, horizon), []).append(m)
    rows.sort(key=lambda r: (r["alpha"], r["T"], r["run_id"], order[r["estimator"]], r["arm"]))
    aggregates = {key: aggregate(ms) for key, ms in
                  sorted(metrics.items(), key=lambda kv: (kv[0][1], kv[0][2], order[kv[0][0]]))}
    return ResultTable(rows, aggregates, config, _precondition_warnings(config))
