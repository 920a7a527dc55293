"""Inner loops of the demonstrators and the counter-based reward tape.

Everything here is written against numpy scalars so it compiles under
``numba.njit`` and also runs unmodified as Python (see ``_backend``).
Arm indices are 0-based inside this module.

Reward tape: the ``j``-th cell of arm ``a``'s tape is a pure function of
``(seed, a, j)``.  Raw bits come from SplitMix64 evaluated at position ``c``
of a stream whose state is keyed by ``(seed, stream)``; Gaussian cells use
Box-Muller over counters ``2j`` and ``2j + 1``.
"""
import math

import numpy as np

from ._backend import jit

GAUSSIAN = 0
BERNOULLI = 1
DETERMINISTIC = 2

GENERATOR_NAME = "splitmix64-counter"
GAUSSIAN_METHOD = "box-muller"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO53_INV = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi

# stream id for ETC's random exploration choices, disjoint from arm streams
ACTION_STREAM = 0xFFFFFFFF


@jit
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@jit
def tape_uniform(seed, stream, counter):
    """Uniform in [0, 1) at position ``counter`` of stream ``stream``."""
    state = mix64(seed + (np.uint64(stream) + _ONE) * _GOLDEN)
    bits = mix64(state + (np.uint64(counter) + _ONE) * _GOLDEN)
    return float(bits >> _S11) * _TWO53_INV


@jit
def tape_sample(seed, arm, cell, mean, model, sigma):
    if model == DETERMINISTIC:
        return mean
    if model == BERNOULLI:
        return 1.0 if tape_uniform(seed, arm, 2 * cell) < mean else 0.0
    u1 = 1.0 - tape_uniform(seed, arm, 2 * cell)
    u2 = tape_uniform(seed, arm, 2 * cell + 1)
    return mean + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@jit
def tape_block(seed, arm, start, count, mean, model, sigma):
    out = np.empty(count, dtype=np.float64)
    for j in range(count):
        out[j] = tape_sample(seed, arm, start + j, mean, model, sigma)
    return out


@jit
def ucb_run(means, model, sigma, seed, horizon, explore, scale):
    k = means.shape[0]
    pulls = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k, dtype=np.float64)
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=np.float64)
    for t in range(horizon):
        arm = -1
        best = -np.inf
        for i in range(k):
            if pulls[i] == 0:
                arm = i
                break
            index = sums[i] / pulls[i] + scale * math.sqrt(2.0 * explore / pulls[i])
            if index > best:
                best = index
                arm = i
        r = tape_sample(seed, arm, pulls[arm], means[arm], model, sigma)
        pulls[arm] += 1
        sums[arm] += r
        actions[t] = arm
        rewards[t] = r
    return actions, rewards


@jit
def sae_run(means, model, sigma, seed, horizon, explore, scale):
    k = means.shape[0]
    pulls = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k, dtype=np.float64)
    active = np.ones(k, dtype=np.bool_)
    eliminated_at = np.zeros(k, dtype=np.int64)
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=np.float64)
    n_active = k
    t = 0
    epoch = 1
    while n_active > 1 and t < horizon:
        pulled = 0
        for i in range(k):
            if not active[i]:
                continue
            if t == horizon:
                break
            r = tape_sample(seed, i, pulls[i], means[i], model, sigma)
            pulls[i] += 1
            sums[i] += r
            actions[t] = i
            rewards[t] = r
            t += 1
            pulled += 1
        if pulled < n_active:
            break
        width = scale * math.sqrt(2.0 * explore / epoch)
        mu_max = -np.inf
        for i in range(k):
            if active[i] and sums[i] / pulls[i] > mu_max:
                mu_max = sums[i] / pulls[i]
        for i in range(k):
            if active[i] and sums[i] / pulls[i] <= mu_max - 2.0 * width:
                active[i] = False
                eliminated_at[i] = epoch
                n_active -= 1
        epoch += 1
    survivor = 0
    for i in range(k):
        if active[i]:
            survivor = i
            break
    while t < horizon:
        r = tape_sample(seed, survivor, pulls[survivor], means[survivor], model, sigma)
        pulls[survivor] += 1
        sums[survivor] += r
        actions[t] = survivor
        rewards[t] = r
        t += 1
    return actions, rewards, eliminated_at


@jit
def etc_run(means, model, sigma, seed, horizon, exploration):
    k = means.shape[0]
    pulls = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k, dtype=np.float64)
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=np.float64)
    for t in range(exploration):
        arm = int(tape_uniform(seed, ACTION_STREAM, t) * k)
        if arm >= k:
            arm = k - 1
        r = tape_sample(seed, arm, pulls[arm], means[arm], model, sigma)
        pulls[arm] += 1
        sums[arm] += r
        actions[t] = arm
        rewards[t] = r
    commit = 0
    best = -np.inf
    for i in range(k):
        if pulls[i] > 0 and sums[i] / pulls[i] > best:
            best = sums[i] / pulls[i]
            commit = i
    for t in range(exploration, horizon):
        r = tape_sample(seed, commit, pulls[commit], means[commit], model, sigma)
        pulls[commit] += 1
        sums[commit] += r
        actions[t] = commit
        rewards[t] = r
    return actions, rewards
