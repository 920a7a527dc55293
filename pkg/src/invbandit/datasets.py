"""Semi-synthetic arm tables (battery lifetimes, gene knock-downs).

Tables are CSV files with header ``arm_id,mean,std``.  They are turned into
Gaussian bandit instances either by dividing by a fixed maximum
(:func:`normalize_max`) or by mapping the mean range onto ``[0, 1]``
(:func:`normalize_affine`).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import BanditInstance, RewardModel, make_instance
from .errors import (
    DegenerateRangeError,
    DuplicateArmIdError,
    InverseBanditError,
    KTooLargeError,
    MuMaxTooSmallError,
    NegativeStdError,
    ParseError,
    UnknownPinnedIdError,
)

HEADER = ("arm_id", "mean", "std")

# battery lifetimes (cycles), high-temperature regime
BATTERY_MU_MAX = 1208.0
BATTERY_SIGMA = 164.0
# gene expression: per-arm reward variance before normalization
GENE_VARIANCE = 0.1
GENE_PINNED_ARM = "12979"


@dataclass(frozen=True, eq=False)
class RawArmTable:
    arm_ids: tuple
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        ids = tuple(str(a) for a in self.arm_ids)
        means = np.array(self.means, dtype=np.float64).reshape(-1)
        stds = np.array(self.stds, dtype=np.float64).reshape(-1)
        if not ids:
            raise InverseBanditError("arm table is empty")
        if not len(ids) == means.size == stds.size:
            raise InverseBanditError("arm_ids, means and stds differ in length")
        if len(set(ids)) != len(ids):
            dup = next(a for a in ids if ids.count(a) > 1)
            raise DuplicateArmIdError(f"duplicate arm id {dup!r}")
        if np.any(stds < 0):
            raise NegativeStdError("std must be >= 0")
        means.setflags(write=False)
        stds.setflags(write=False)
        object.__setattr__(self, "arm_ids", ids)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    def __len__(self):
        return len(self.arm_ids)

    def __eq__(self, other):
        if not isinstance(other, RawArmTable):
            return NotImplemented
        return (self.arm_ids == other.arm_ids and np.array_equal(self.means, other.means)
                and np.array_equal(self.stds, other.stds))

    def __hash__(self):
        return hash((self.arm_ids, self.means.tobytes(), self.stds.tobytes()))

    def select(self, indices) -> "RawArmTable":
        idx = sorted(int(i) for i in indices)
        return RawArmTable(tuple(self.arm_ids[i] for i in idx), self.means[idx], self.stds[idx])


def load_arm_table(path) -> RawArmTable:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"arm table not found: {path}")
    ids, means, stds = [], [], []
    seen = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise ParseError(f"expected header {','.join(HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            arm_id = row[0].strip()
            try:
                mean, std = float(row[1]), float(row[2])
            except ValueError:
                raise ParseError(f"non-numeric value in {row!r}", line=lineno) from None
            if not (math.isfinite(mean) and math.isfinite(std)):
                raise ParseError("values must be finite", line=lineno)
            if arm_id in seen:
                raise DuplicateArmIdError(f"duplicate arm id {arm_id!r} on line {lineno}")
            if std < 0:
                raise NegativeStdError(f"negative std on line {lineno}")
            seen.add(arm_id)
            ids.append(arm_id)
            means.append(mean)
            stds.append(std)
    if not ids:
        raise ParseError("table has no rows", line=2)
    return RawArmTable(tuple(ids), means, stds)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture table (``battery_high.csv``, ``gene_expression.csv``)."""
    return Path(str(resources.files("invbandit") / "data" / name))


def normalize_max(table: RawArmTable, mu_max: float, sigma_raw: float) -> BanditInstance:
    """Divide means by ``mu_max``; the Gaussian variance becomes ``(sigma_raw / mu_max)^2``."""
    if not mu_max > 0:
        raise MuMaxTooSmallError("mu_max must be positive")
    if table.means.max() > mu_max:
        raise MuMaxTooSmallError(f"mu_max = {mu_max} is below the largest raw mean {table.means.max()}")
    variance = (sigma_raw / mu_max) ** 2
    return make_instance(table.means / mu_max, RewardModel.gaussian(variance))


def normalize_affine(table: RawArmTable, variance_raw: float) -> BanditInstance:
    """Map ``[min, max]`` of the raw means onto ``[0, 1]`` and rescale the variance."""
    lo, hi = float(table.means.min()), float(table.means.max())
    if hi == lo:
        raise DegenerateRangeError("all raw means are equal")
    span = hi - lo
    return make_instance((table.means - lo) / span, RewardModel.gaussian(variance_raw / span**2))


def subsample_arms(table: RawArmTable, k: int, seed: int, pinned_ids=()) -> RawArmTable:
    """Histogram-stratified subset of ``k`` arms, original order preserved.

    Pinned ids are always kept.  The mean range is cut into ``k`` equal-width
    bins and one not-yet-chosen arm is drawn uniformly from each nonempty bin
    (lowest bin first) until ``k`` arms are held; leftover slots are filled
    uniformly from the remaining arms.
    """
    n = len(table)
    if k > n:
        raise KTooLargeError(f"cannot draw {k} arms from a table of {n}")
    if k < 1:
        raise KTooLargeError("k must be at least 1")
    index = {a: i for i, a in enumerate(table.arm_ids)}
    pinned = []
    for a in pinned_ids:
        if str(a) not in index:
            raise UnknownPinnedIdError(f"pinned arm {a!r} is not in the table")
        if index[str(a)] not in pinned:
            pinned.append(index[str(a)])
    if len(pinned) > k:
        raise KTooLargeError(f"{len(pinned)} pinned arms do not fit in k = {k}")
    if k == n:
        return table.select(range(n))

    rng = np.random.Generator(np.random.PCG64(seed))
    chosen = set(pinned)
    edges = np.linspace(table.means.min(), table.means.max(), k + 1)
    bins = np.clip(np.searchsorted(edges, table.means, side="right") - 1, 0, k - 1)
    for b in range(k):
        if len(chosen) >= k:
            break
        members = [i for i in np.flatnonzero(bins == b) if i not in chosen]
        if members:
            chosen.add(int(members[rng.integers(len(members))]))
    rest = [i for i in range(n) if i not in chosen]
    if len(chosen) < k:
        chosen.update(int(i) for i in rng.choice(rest, size=k - len(chosen), replace=False))
    return table.select(chosen)
