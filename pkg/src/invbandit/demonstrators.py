"""Low-regret demonstrators: successive arm elimination, UCB, explore-then-commit.

Each ``run_*`` function returns an immutable :class:`Trajectory`.  The
rewards the demonstrator saw are kept in ``hidden_rewards`` for diagnostics
only; estimators work from :meth:`Trajectory.without_rewards`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .core import BanditInstance
from .errors import ConfigError, HorizonTooSmallError, ZeroPullsError

ALGORITHMS = ("SAE", "UCB", "ETC")

# below this alpha, (T**alpha - 1) / alpha is replaced by its limit log(T)
ALPHA_LIMIT = 1e-12


def exploration_term(alpha: float, horizon: int) -> float:
    """``(T**alpha - 1) / alpha``, or ``log(T)`` in the alpha -> 0 limit."""
    if alpha < ALPHA_LIMIT:
        return math.log(horizon)
    return math.expm1(alpha * math.log(horizon)) / alpha


def confidence_width(alpha, horizon, pulls, width_scale=1.0):
    """Optimism bonus ``width_scale * sqrt(2 (T^alpha - 1) / (alpha n))``.

    ``pulls`` may be an integer or an integer array.  Zero pulls correspond to
    an infinite width and must be handled by the caller.
    """
    if horizon < 2:
        raise HorizonTooSmallError("confidence widths need T >= 2")
    n = np.asarray(pulls)
    if np.any(n < 1):
        raise ZeroPullsError("width is infinite for an arm with no pulls")
    width = width_scale * np.sqrt(2.0 * exploration_term(alpha, horizon) / n)
    return float(width) if width.ndim == 0 else width


@dataclass(frozen=True)
class DemonstratorConfig:
    algorithm: str
    alpha: float
    horizon: int
    width_scale: float = 1.0
    etc_exploration_rounds: int | None = None

    def __post_init__(self):
        algorithm = str(self.algorithm).upper()
        if algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        object.__setattr__(self, "algorithm", algorithm)
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in [0, 1), got {self.alpha}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon}")
        object.__setattr__(self, "horizon", int(self.horizon))
        if not self.width_scale > 0.0:
            raise ConfigError(f"width_scale must be > 0, got {self.width_scale}")
        if self.etc_exploration_rounds is not None and not 0 <= self.etc_exploration_rounds <= self.horizon:
            raise ConfigError("etc_exploration_rounds must lie in [0, T]")

    @property
    def exploration_rounds(self) -> int:
        """ETC exploration length, ``ceil(T^(2/3))`` unless set explicitly."""
        if self.etc_exploration_rounds is not None:
            return int(self.etc_exploration_rounds)
        # round first: 1000 ** (2 / 3) evaluates to 99.99999999999997
        return min(self.horizon, math.ceil(round(self.horizon ** (2.0 / 3.0), 9)))


@dataclass(frozen=True)
class ArmStatistics:
    pulls: int
    reward_sum: float

    @property
    def mean(self) -> float:
        if self.pulls < 1:
            raise ZeroPullsError("sample mean undefined with zero pulls")
        return self.reward_sum / self.pulls


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One demonstration: the action sequence plus bookkeeping.

    ``actions`` holds 1-based arm indices.  ``elimination_epochs`` (SAE only)
    stores the epoch at which each arm was eliminated, 0 for never.
    """

    algorithm: str
    horizon: int
    alpha: float
    width_scale: float
    actions: np.ndarray
    pull_counts: np.ndarray
    hidden_rewards: np.ndarray | None = field(default=None, repr=False)
    elimination_epochs: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "actions", _frozen(self.actions, np.int64))
        object.__setattr__(self, "pull_counts", _frozen(self.pull_counts, np.int64))
        if self.hidden_rewards is not None:
            object.__setattr__(self, "hidden_rewards", _frozen(self.hidden_rewards, np.float64))
        if self.elimination_epochs is not None:
            object.__setattr__(self, "elimination_epochs", _frozen(self.elimination_epochs, np.int64))
        k = self.pull_counts.shape[0]
        if self.actions.shape[0] != self.horizon:
            raise ConfigError(f"trajectory has {self.actions.shape[0]} actions but T = {self.horizon}")
        if self.horizon and (self.actions.min() < 1 or self.actions.max() > k):
            raise ConfigError(f"actions must lie in [1, {k}]")
        if not np.array_equal(np.bincount(self.actions - 1, minlength=k), self.pull_counts):
            raise ConfigError("pull_counts do not match the action sequence")

    @property
    def n_arms(self) -> int:
        return int(self.pull_counts.shape[0])

    def without_rewards(self) -> "Trajectory":
        """The view estimators are allowed to see."""
        return replace(self, hidden_rewards=None)

    def arm_statistics(self, arm: int, t: int | None = None) -> ArmStatistics:
        """Pull count and reward sum of ``arm`` over rounds ``1..t`` (diagnostics)."""
        if self.hidden_rewards is None:
            raise ConfigError("rewards are not available on this trajectory")
        t = self.horizon if t is None else t
        mask = self.actions[:t] == arm
        return ArmStatistics(int(mask.sum()), float(self.hidden_rewards[:t][mask].sum()))

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.to_dict(include_rewards=True) == other.to_dict(include_rewards=True)

    def to_dict(self, include_rewards: bool = False) -> dict:
        data = {
            "algorithm": self.algorithm,
            "T": self.horizon,
            "alpha": float(self.alpha),
            "width_scale": float(self.width_scale),
            "actions": self.actions.tolist(),
            "pull_counts": self.pull_counts.tolist(),
        }
        if self.elimination_epochs is not None:
            data["elimination_epochs"] = self.elimination_epochs.tolist()
        if include_rewards and self.hidden_rewards is not None:
            data["hidden_rewards"] = self.hidden_rewards.tolist()
        return data

    def to_json(self, include_rewards: bool = False) -> str:
        return json.dumps(self.to_dict(include_rewards))

    @classmethod
    def from_dict(cls, data: dict) -> "Trajectory":
        try:
            return cls(
                algorithm=str(data["algorithm"]).upper(),
                horizon=int(data["T"]),
                alpha=float(data["alpha"]),
                width_scale=float(data.get("width_scale", 1.0)),
                actions=data["actions"],
                pull_counts=data["pull_counts"],
                hidden_rewards=data.get("hidden_rewards"),
                elimination_epochs=data.get("elimination_epochs"),
            )
        except KeyError as exc:
            raise ConfigError(f"trajectory JSON is missing field {exc.args[0]!r}") from None

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        return cls.from_dict(json.loads(text))


def _check(instance: BanditInstance, config: DemonstratorConfig, algorithm: str):
    if config.algorithm != algorithm:
        raise ConfigError(f"config is for {config.algorithm}, not {algorithm}")
    if config.horizon < instance.n_arms:
        raise HorizonTooSmallError(f"T = {config.horizon} is smaller than K = {instance.n_arms}")


def _kernel_args(instance: BanditInstance, seed):
    model = instance.reward_model
    return (np.ascontiguousarray(instance.means), model.code, model.sigma,
            np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def _explore(config: DemonstratorConfig) -> float:
    # T = 1 only occurs with K = 1, where no width is ever evaluated
    return exploration_term(config.alpha, config.horizon) if config.horizon >= 2 else 0.0


def _finish(instance, config, actions, rewards, epochs=None) -> Trajectory:
    return Trajectory(
        algorithm=config.algorithm,
        horizon=config.horizon,
        alpha=config.alpha,
        width_scale=config.width_scale,
        actions=actions + 1,
        pull_counts=np.bincount(actions, minlength=instance.n_arms),
        hidden_rewards=rewards,
        elimination_epochs=epochs,
    )


def run_sae(instance: BanditInstance, config: DemonstratorConfig, seed: int) -> Trajectory:
    """Successive arm elimination with epoch-indexed widths.

    Every active arm is pulled once per epoch in ascending index order.  At
    the end of epoch ``r`` an arm is dropped when its sample mean is at most
    the best active sample mean minus twice the width at ``n = r``.
    """
    _check(instance, config, "SAE")
    with np.errstate(over="ignore"):
        actions, rewards, epochs = _kernels.sae_run(
            *_kernel_args(instance, seed), config.horizon, _explore(config), config.width_scale)
    return _finish(instance, config, actions, rewards, epochs)


def run_ucb(instance: BanditInstance, config: DemonstratorConfig, seed: int) -> Trajectory:
    """Pull ``argmax_i mean_i + width(n_i)``; unpulled arms first, ties to the lowest index."""
    _check(instance, config, "UCB")
    with np.errstate(over="ignore"):
        actions, rewards = _kernels.ucb_run(
            *_kernel_args(instance, seed), config.horizon, _explore(config), config.width_scale)
    return _finish(instance, config, actions, rewards)


def run_etc(instance: BanditInstance, config: DemonstratorConfig, seed: int) -> Trajectory:
    """Uniformly random pulls for the exploration phase, then commit.

    The committed arm is the best sample mean among explored arms, or arm 1
    when nothing was explored.
    """
    _check(instance, config, "ETC")
    with np.errstate(over="ignore"):
        actions, rewards = _kernels.etc_run(
            *_kernel_args(instance, seed), config.horizon, config.exploration_rounds)
    return _finish(instance, config, actions, rewards)


_RUNNERS = {"SAE": run_sae, "UCB": run_ucb, "ETC": run_etc}


def simulate(instance: BanditInstance, config: DemonstratorConfig, seed: int) -> Trajectory:
    return _RUNNERS[config.algorithm](instance, config, seed)
