"""Reward estimation from the action sequence of a demonstration.

All estimators receive ``mu_star``, the best arm's mean, and never look at
rewards.  Failures for an individual arm (say it was never switched off) are
recorded on that arm's entry and do not abort the rest of the report.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .demonstrators import Trajectory, confidence_width
from .errors import (
    AlgorithmMismatchError,
    ArmIndexOutOfRangeError,
    ArmNeverPulledError,
    ArmStillActiveError,
    EmptyTrajectoryError,
    InverseBanditError,
    NoValidSwitchError,
    NonPositiveInputError,
)


@dataclass(frozen=True)
class ArmEstimate:
    arm: int
    estimate: float | None = None
    tau: int | None = None
    pulls_at_switch: int | None = None
    best_pulls_at_switch: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class EstimateReport:
    estimator: str
    mu_star: float
    identified_best: int
    arms: dict = field(default_factory=dict)  # arm -> ArmEstimate, excludes identified_best

    def estimate(self, arm: int) -> float | None:
        return self.arms[arm].estimate if arm in self.arms else None

    def estimates(self) -> dict:
        return {a: e.estimate for a, e in self.arms.items() if e.ok}

    def to_rows(self) -> list:
        rows = []
        for arm in sorted(self.arms):
            e = self.arms[arm]
            rows.append({
                "arm": arm,
                "tau": "" if e.tau is None else e.tau,
                "pulls_at_switch": "" if e.pulls_at_switch is None else e.pulls_at_switch,
                "estimate": "" if e.estimate is None else repr(float(e.estimate)),
            })
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["arm", "tau", "pulls_at_switch", "estimate"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.to_rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "mu_star": self.mu_star,
            "identified_best": self.identified_best,
            "arms": [
                {"arm": e.arm, "tau": e.tau, "pulls_at_switch": e.pulls_at_switch,
                 "best_pulls_at_switch": e.best_pulls_at_switch,
                 "estimate": e.estimate, "error": e.error}
                for _, e in sorted(self.arms.items())
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class NaiveEstimatorConfig:
    c0: float = 1.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise NonPositiveInputError(f"C_0 must be > 0, got {self.c0}")


NAIVE_C0_GRID = (0.2, 0.75, 1.0, 1.5)


def _actions(trajectory: Trajectory) -> np.ndarray:
    if trajectory.horizon == 0 or trajectory.actions.size == 0:
        raise EmptyTrajectoryError("trajectory has no actions")
    return trajectory.actions


def _check_arm(trajectory: Trajectory, arm: int):
    if not 1 <= arm <= trajectory.n_arms:
        raise ArmIndexOutOfRangeError(f"arm {arm} not in [1, {trajectory.n_arms}]")


def most_pulled_arm(trajectory: Trajectory) -> int:
    _actions(trajectory)
    return int(np.argmax(trajectory.pull_counts)) + 1


def _last_round(actions: np.ndarray, arm: int, before: int | None = None) -> int:
    """Last 1-based round ``t < before`` with ``I_t == arm``; 0 if none."""
    window = actions if before is None else actions[: before - 1]
    hits = np.flatnonzero(window == arm)
    return int(hits[-1]) + 1 if hits.size else 0


def sae_switching_round(trajectory: Trajectory, arm: int) -> int:
    """Round of the final pull of ``arm``, which must not be the final round."""
    actions = _actions(trajectory)
    _check_arm(trajectory, arm)
    tau = _last_round(actions, arm)
    if tau == 0:
        raise ArmNeverPulledError(f"arm {arm} was never pulled")
    if tau == trajectory.horizon:
        raise ArmStillActiveError(f"arm {arm} is still pulled at the final round")
    return tau


def ucb_switching_round(trajectory: Trajectory, arm: int, best: int) -> int:
    """Last pull of ``arm`` that is followed by at least one pull of ``best``."""
    actions = _actions(trajectory)
    _check_arm(trajectory, arm)
    _check_arm(trajectory, best)
    if arm == best:
        raise InverseBanditError("switching round is defined for arms other than the best")
    last_best = _last_round(actions, best)
    tau = _last_round(actions, arm, before=last_best) if last_best else 0
    if tau == 0:
        raise NoValidSwitchError(f"no pull of arm {arm} is followed by a pull of arm {best}")
    return tau


def _pulls_through(actions: np.ndarray, arm: int, t: int) -> int:
    return int(np.count_nonzero(actions[:t] == arm))


def sae_estimate(mu_star: float, alpha: float, horizon: int, pulls: int,
                 width_scale: float = 1.0) -> float:
    return mu_star - 2.0 * confidence_width(alpha, horizon, pulls, width_scale)


def ucb_estimate(mu_star: float, alpha: float, horizon: int, pulls: int, best_pulls: int,
                 width_scale: float = 1.0) -> float:
    return mu_star - (confidence_width(alpha, horizon, pulls, width_scale)
                      - confidence_width(alpha, horizon, best_pulls, width_scale))


def naive_estimate(mu_star: float, horizon: int, pulls: int, c0: float = 1.0) -> float:
    return mu_star - c0 * math.sqrt(math.log(horizon) / pulls)


def _check_tag(trajectory: Trajectory, expected: str, force: bool):
    if not force and trajectory.algorithm != expected:
        raise AlgorithmMismatchError(
            f"estimator expects a {expected} demonstration, got {trajectory.algorithm}; "
            "pass force=True to override")


def estimate_sae(trajectory: Trajectory, mu_star: float, force: bool = False) -> EstimateReport:
    """``mu_hat_i = mu_star - 2 C(n_i(tau_i))`` with ``tau_i`` the last pull of arm ``i``."""
    _check_tag(trajectory, "SAE", force)
    demo = trajectory.without_rewards()
    actions = _actions(demo)
    best = most_pulled_arm(demo)
    arms = {}
    for arm in range(1, demo.n_arms + 1):
        if arm == best:
            continue
        try:
            tau = sae_switching_round(demo, arm)
        except InverseBanditError as exc:
            arms[arm] = ArmEstimate(arm, error=f"{type(exc).__name__}: {exc}")
            continue
        n = _pulls_through(actions, arm, tau)
        arms[arm] = ArmEstimate(arm, sae_estimate(mu_star, demo.alpha, demo.horizon, n,
                                                  demo.width_scale), tau, n)
    return EstimateReport("procedure_sae", float(mu_star), best, arms)


def estimate_ucb(trajectory: Trajectory, mu_star: float, force: bool = False) -> EstimateReport:
    """``mu_hat_i = mu_star - (C(n_i(tau_i)) - C(n_best(tau_i)))`` at the UCB switching round."""
    _check_tag(trajectory, "UCB", force)
    demo = trajectory.without_rewards()
    actions = _actions(demo)
    best = most_pulled_arm(demo)
    arms = {}
    for arm in range(1, demo.n_arms + 1):
        if arm == best:
            continue
        try:
            tau = ucb_switching_round(demo, arm, best)
        except InverseBanditError as exc:
            arms[arm] = ArmEstimate(arm, error=f"{type(exc).__name__}: {exc}")
            continue
        n_arm = _pulls_through(actions, arm, tau)
        n_best = _pulls_through(actions, best, tau)
        if n_best == 0:
            arms[arm] = ArmEstimate(arm, tau=tau, pulls_at_switch=n_arm, best_pulls_at_switch=0,
                                    error=f"best arm {best} not pulled by round {tau}")
            continue
        value = ucb_estimate(mu_star, demo.alpha, demo.horizon, n_arm, n_best, demo.width_scale)
        arms[arm] = ArmEstimate(arm, value, tau, n_arm, n_best)
    return EstimateReport("procedure_ucb", float(mu_star), best, arms)


def estimate_naive(trajectory: Trajectory, mu_star: float,
                   config: NaiveEstimatorConfig | None = None) -> EstimateReport:
    """Algorithm-agnostic baseline ``mu_star - C_0 sqrt(log T / n_i)`` on final pull counts."""
    config = config or NaiveEstimatorConfig()
    demo = trajectory.without_rewards()
    _actions(demo)
    best = most_pulled_arm(demo)
    arms = {}
    for arm in range(1, demo.n_arms + 1):
        if arm == best:
            continue
        n = int(demo.pull_counts[arm - 1])
        if n == 0:
            arms[arm] = ArmEstimate(arm, error=f"ArmNeverPulledError: arm {arm} was never pulled")
            continue
        arms[arm] = ArmEstimate(arm, naive_estimate(mu_star, demo.horizon, n, config.c0),
                                pulls_at_switch=n)
    return EstimateReport(f"naive_c0={config.c0!r}", float(mu_star), best, arms)
