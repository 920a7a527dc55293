"""Bandit instances, suboptimality gaps and the replayable reward tape.

Arms are numbered from 1 in every public function, matching how
demonstrations are usually written down; arrays inside are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    ArmIndexOutOfRangeError,
    BernoulliMeanOutOfRangeError,
    EmptyMeansError,
    InverseBanditError,
    NegativeVarianceError,
    NonUniqueBestError,
)

_MODEL_CODES = {
    "gaussian": _kernels.GAUSSIAN,
    "bernoulli": _kernels.BERNOULLI,
    "deterministic": _kernels.DETERMINISTIC,
}


@dataclass(frozen=True)
class RewardModel:
    """Reward distribution family shared by all arms of an instance.

    ``variance`` is only meaningful for ``kind == "gaussian"``.
    """

    kind: str = "gaussian"
    variance: float = 1.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in _MODEL_CODES:
            raise InverseBanditError(f"unknown reward model {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        variance = float(self.variance) if kind == "gaussian" else 0.0
        if not variance >= 0.0:
            raise NegativeVarianceError(f"variance must be >= 0, got {self.variance}")
        object.__setattr__(self, "variance", variance)

    @classmethod
    def gaussian(cls, variance=1.0):
        return cls("gaussian", variance)

    @classmethod
    def bernoulli(cls):
        return cls("bernoulli", 0.0)

    @classmethod
    def deterministic(cls):
        return cls("deterministic", 0.0)

    @property
    def code(self) -> int:
        return _MODEL_CODES[self.kind]

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def to_dict(self) -> dict:
        if self.kind == "gaussian":
            return {"type": self.kind, "variance": self.variance}
        return {"type": self.kind}

    @classmethod
    def from_dict(cls, data: dict) -> "RewardModel":
        return cls(data["type"], data.get("variance", 1.0))


@dataclass(frozen=True)
class BanditInstance:
    means: np.ndarray
    reward_model: RewardModel = field(default_factory=RewardModel)

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64).reshape(-1)
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    @property
    def n_arms(self) -> int:
        return int(self.means.shape[0])

    @property
    def unique_best(self) -> bool:
        return int(np.count_nonzero(self.means == self.means.max())) == 1

    def to_dict(self) -> dict:
        return {"means": [float(m) for m in self.means], "model": self.reward_model.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "BanditInstance":
        return make_instance(data["means"], RewardModel.from_dict(data.get("model", {"type": "gaussian"})))

    def __eq__(self, other):
        if not isinstance(other, BanditInstance):
            return NotImplemented
        return self.reward_model == other.reward_model and np.array_equal(self.means, other.means)

    def __hash__(self):
        return hash((self.reward_model, self.means.tobytes()))


@dataclass(frozen=True)
class GapProfile:
    optimal_arm: int  # 1-based
    optimal_mean: float
    gaps: np.ndarray


def make_instance(means, reward_model: RewardModel | None = None) -> BanditInstance:
    """Validate ``means`` against ``reward_model`` and build an instance."""
    model = reward_model if reward_model is not None else RewardModel()
    arr = np.asarray(means, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise EmptyMeansError("an instance needs at least one arm")
    if not np.all(np.isfinite(arr)):
        raise InverseBanditError("means must be finite")
    if model.kind == "bernoulli" and (arr.min() < 0.0 or arr.max() > 1.0):
        raise BernoulliMeanOutOfRangeError("Bernoulli means must lie in [0, 1]")
    return BanditInstance(arr, model)


def gap_profile(instance: BanditInstance) -> GapProfile:
    if not instance.unique_best:
        raise NonUniqueBestError("the best arm is not unique; gaps are undefined")
    best = int(np.argmax(instance.means))
    mu_star = float(instance.means[best])
    gaps = mu_star - instance.means
    gaps.setflags(write=False)
    return GapProfile(best + 1, mu_star, gaps)


class RewardTape:
    """Per-arm reward streams read one cell per pull.

    Cell ``j`` of arm ``i`` depends only on ``(seed, i, j)``, so any cell can
    be re-read with :meth:`read` without storing the tape.
    """

    def __init__(self, instance: BanditInstance, seed: int):
        self.instance = instance
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._seed64 = np.uint64(self.seed)
        self.cursors = np.zeros(instance.n_arms, dtype=np.int64)

    def _check_arm(self, arm):
        if not 1 <= arm <= self.instance.n_arms:
            raise ArmIndexOutOfRangeError(f"arm {arm} not in [1, {self.instance.n_arms}]")

    def read(self, arm: int, cell: int) -> float:
        """Value of the ``cell``-th (0-based) cell of ``arm``; the cursor is untouched."""
        self._check_arm(arm)
        model = self.instance.reward_model
        with np.errstate(over="ignore"):
            return float(_kernels.tape_sample(
                self._seed64, np.int64(arm - 1), np.int64(cell),
                float(self.instance.means[arm - 1]), model.code, model.sigma))

    def read_block(self, arm: int, start: int, count: int) -> np.ndarray:
        self._check_arm(arm)
        model = self.instance.reward_model
        with np.errstate(over="ignore"):
            return _kernels.tape_block(
                self._seed64, np.int64(arm - 1), np.int64(start), count,
                float(self.instance.means[arm - 1]), model.code, model.sigma)


def sample_reward(tape: RewardTape, instance: BanditInstance, arm: int) -> float:
    """Draw the next reward of ``arm`` (1-based) and advance its cursor."""
    if instance is not tape.instance and instance != tape.instance:
        raise InverseBanditError("tape was created for a different instance")
    tape._check_arm(arm)
    value = tape.read(arm, int(tape.cursors[arm - 1]))
    tape.cursors[arm - 1] += 1
    return value
