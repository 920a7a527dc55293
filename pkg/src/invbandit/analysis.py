"""Regret, estimation error and the theoretical reference curves."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BanditInstance, gap_profile
from .demonstrators import Trajectory, exploration_term
from .errors import (
    EmptyRunsError,
    InverseBanditError,
    NonPositiveInputError,
    NonPositivePointError,
    TooFewPointsError,
    ZeroGapError,
)
from .estimators import EstimateReport


def pseudo_regret(instance: BanditInstance, trajectory: Trajectory) -> float:
    """Realized pseudo-regret ``sum_i gap_i * n_i(T)``."""
    gaps = gap_profile(instance).gaps
    if trajectory.n_arms != instance.n_arms:
        raise InverseBanditError("trajectory and instance have different numbers of arms")
    return float(np.dot(gaps, trajectory.pull_counts))


def estimation_errors(instance: BanditInstance, report: EstimateReport) -> dict:
    """``|mu_hat_i - mu_i|`` per estimated arm; failed arms map to ``None``."""
    out = {}
    for arm, entry in sorted(report.arms.items()):
        if not 1 <= arm <= instance.n_arms:
            raise InverseBanditError(f"report arm {arm} is not an arm of the instance")
        out[arm] = None if not entry.ok else abs(entry.estimate - float(instance.means[arm - 1]))
    return out


def kappa(alpha: float, horizon: int, gap: float) -> float:
    """Characteristic pull count ``4 (T^alpha - 1) / (alpha gap^2)``."""
    if not gap > 0:
        raise ZeroGapError(f"kappa needs a positive gap, got {gap}")
    return 4.0 * exploration_term(alpha, horizon) / gap**2


def pull_sandwich(alpha: float, horizon: int, gap: float) -> tuple:
    """High-probability range ``(kappa / 32, 8 kappa)`` of a suboptimal arm's pull count."""
    k = kappa(alpha, horizon, gap)
    return k / 32.0, 8.0 * k


def minimax_lower_bound(expected_pulls: float) -> float:
    """``(1/16) min(1 / sqrt(E[n]), 1)``, the error floor for any estimator."""
    if expected_pulls < 0:
        raise NonPositiveInputError("expected pull count must be >= 0")
    if expected_pulls <= 1.0:
        return 1.0 / 16.0
    return min(1.0 / math.sqrt(expected_pulls), 1.0) / 16.0


def tradeoff_curve(gap: float, regret: float) -> float:
    """Unit-constant error/regret curve ``sqrt(gap / regret)`` for two arms."""
    if not (gap > 0 and regret > 0):
        raise NonPositiveInputError("gap and regret must both be positive")
    return math.sqrt(gap / regret)


def regret_upper_bound(alpha: float, horizon: int, gaps) -> float:
    """``sum_{i != i*} 32 (T^alpha - 1) / (alpha gap_i)``; gaps of 0 mark the best arm."""
    gaps = np.asarray(gaps, dtype=np.float64).reshape(-1)
    subopt = gaps[gaps != 0.0]
    if np.any(subopt < 0):
        raise ZeroGapError("gaps must be nonnegative")
    if subopt.size == 0:
        return 0.0
    return float(np.sum(32.0 * exploration_term(alpha, horizon) / subopt))


def estimation_precondition(alpha: float, horizon: int, gaps, factor: float = 16.0) -> bool:
    """Whether ``T >= factor * sum_i kappa_i`` holds over the suboptimal arms."""
    gaps = np.asarray(gaps, dtype=np.float64).reshape(-1)
    total = sum(kappa(alpha, horizon, g) for g in gaps if g > 0)
    return horizon >= factor * total


@dataclass(frozen=True)
class TheoreticalCurves:
    kappa: float
    pull_sandwich: tuple
    minimax_lb: float
    tradeoff: float
    regret_ub: float


def theoretical_curves(alpha: float, horizon: int, gap: float) -> TheoreticalCurves:
    """Reference values for one suboptimal arm of a two-armed instance.

    The lower bound and tradeoff curve are evaluated at ``E[n] = kappa`` and
    ``E[R] = gap * kappa`` respectively.
    """
    k = kappa(alpha, horizon, gap)
    return TheoreticalCurves(
        kappa=k,
        pull_sandwich=(k / 32.0, 8.0 * k),
        minimax_lb=minimax_lower_bound(k),
        tradeoff=tradeoff_curve(gap, gap * k),
        regret_ub=regret_upper_bound(alpha, horizon, [0.0, gap]),
    )


@dataclass(frozen=True)
class RunMetrics:
    pseudo_regret: float
    abs_errors: dict  # arm -> float | None
    pulls: dict  # arm -> int


@dataclass(frozen=True)
class ArmAggregate:
    arm: int
    n_runs: int
    mean_abs_error: float | None
    mse: float | None
    stderr: float | None
    mean_pulls: float


@dataclass(frozen=True)
class AggregateMetrics:
    n_runs: int
    mean_regret: float
    regret_stderr: float
    arms: dict = field(default_factory=dict)  # arm -> ArmAggregate
    single_run: bool = False


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def aggregate(runs) -> AggregateMetrics:
    """Monte Carlo summary of a batch of runs, summed in the given order.

    Arms whose estimate failed in a run are left out of that arm's error
    statistics; ``n_runs`` on each arm counts the runs that contributed.
    A batch of one run gets standard errors of 0 and ``single_run=True``.
    """
    runs = list(runs)
    if not runs:
        raise EmptyRunsError("cannot aggregate zero runs")
    arm_set = set(runs[0].pulls)
    if any(set(r.pulls) != arm_set for r in runs):
        raise InverseBanditError("runs cover different arm sets")
    regrets = np.array([r.pseudo_regret for r in runs], dtype=np.float64)
    arms = {}
    for arm in sorted(arm_set):
        errs = np.array([r.abs_errors[arm] for r in runs if r.abs_errors.get(arm) is not None],
                        dtype=np.float64)
        pulls = np.array([r.pulls[arm] for r in runs], dtype=np.float64)
        if errs.size:
            arms[arm] = ArmAggregate(arm, int(errs.size), float(errs.mean()),
                                     float(np.mean(errs**2)), _stderr(errs), float(pulls.mean()))
        else:
            arms[arm] = ArmAggregate(arm, 0, None, None, None, float(pulls.mean()))
    return AggregateMetrics(len(runs), float(regrets.mean()), _stderr(regrets), arms, len(runs) == 1)


def loglog_slope(points) -> tuple:
    """Least-squares line through ``(log x, log y)``; returns ``(slope, intercept)``."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise TooFewPointsError("need at least two (x, y) points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise NonPositivePointError("log-log fit needs strictly positive finite points")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise TooFewPointsError("need at least two distinct x values")
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)
