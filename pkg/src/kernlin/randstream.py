"""Counter-keyed random variates.

Every draw is a pure function of ``(seed, j, i, slot)``: the master seed, the
0-based sample index ``j``, the 1-based dimension index ``i`` (``i = 0`` is
reserved for per-sample draws such as RFF phases) and a small slot number
that separates the different variates needed per ``(j, i)``.  Nothing is
stateful, so the same projection entry ``r_ij`` is produced for every data
vector, in any order, on any thread.

The 64-bit words come from a chain of splitmix64 finalizers.  Integer words
are bit-exact everywhere; the float transforms below use ``log``/``cos``/``tan``
and may differ in the last ulp between libm builds.

All functions broadcast over numpy arrays for ``j`` and ``i``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

MASK64 = (1 << 64) - 1

GOLDEN = 0x9E3779B97F4A7C15
_J_STEP = 0x9E3779B97F4A7C15
_I_STEP = 0xC2B2AE3D27D4EB4F
_LANE_STEP = 0x165667B19E3779F9
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# slot layout shared by every feature map; each slot owns two 64-bit lanes
SLOT_CWS_R = 0
SLOT_CWS_C = 1
SLOT_CWS_BETA = 2
SLOT_PROJ = 3
SLOT_PHASE = 4
SLOT_SEED = 5

_U = np.uint64
_TWO_PI = 2.0 * np.pi


class StreamKey(NamedTuple):
    """Address of one variate; splat into the samplers: ``gaussian(*key)``."""

    seed: int
    j: int
    i: int
    slot: int = 0


def mix64(z):
    """splitmix64 output finalizer on a uint64 array."""
    z = np.asarray(z, dtype=_U)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U(30))) * _U(_M1)
        z = (z ^ (z >> _U(27))) * _U(_M2)
        return z ^ (z >> _U(31))


def seed_state(seed: int) -> np.uint64:
    """First link of the chain; depends on the seed only."""
    return mix64(np.array([(int(seed) & MASK64) ^ GOLDEN], dtype=_U))[0]


def stream_words(seed, j, i, lane):
    """Raw 64-bit words for every broadcast ``(j, i)`` at a given lane."""
    h = seed_state(seed)
    j = np.asarray(j, dtype=np.int64).astype(_U)
    i = np.asarray(i, dtype=np.int64).astype(_U)
    with np.errstate(over="ignore"):
        h = mix64(h + (j + _U(1)) * _U(_J_STEP))
        h = mix64(h + (i + _U(1)) * _U(_I_STEP))
        h = mix64(h + _U((int(lane) + 1) * _LANE_STEP & MASK64))
    return h


def words_to_unit(words):
    """Map uint64 words into the open interval (0, 1).

    The top 52 bits ``m`` give ``(m + 0.5) / 2**52``; every result is exact in
    double precision, the smallest is ``2**-53`` and the largest ``1 - 2**-53``.
    """
    m = (np.asarray(words, dtype=_U) >> _U(12)).astype(np.float64)
    return (m + 0.5) * 2.0**-52


def _scalar(x, *inputs):
    if all(np.ndim(a) == 0 for a in inputs):
        return float(x)
    return x


def uniform01(seed, j, i, slot=0):
    u = words_to_unit(stream_words(seed, j, i, 2 * slot))
    return _scalar(u, j, i)


def _uniform_pair(seed, j, i, slot):
    u1 = words_to_unit(stream_words(seed, j, i, 2 * slot))
    u2 = words_to_unit(stream_words(seed, j, i, 2 * slot + 1))
    return u1, u2


def gaussian(seed, j, i, slot=0):
    """Standard normal by Box-Muller on the slot's two lanes (cosine branch)."""
    u1, u2 = _uniform_pair(seed, j, i, slot)
    return _scalar(np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2), j, i)


def cauchy(seed, j, i, slot=0):
    """Standard Cauchy, ``tan(pi * (U - 1/2))``."""
    u = words_to_unit(stream_words(seed, j, i, 2 * slot))
    return _scalar(np.tan(np.pi * (u - 0.5)), j, i)


def gamma21(seed, j, i, slot=0):
    """Gamma(2, 1) as the sum of two unit exponentials."""
    u1, u2 = _uniform_pair(seed, j, i, slot)
    return _scalar(-np.log(u1) - np.log(u2), j, i)


def uniform_0_2pi(seed, j, i, slot=0):
    u = words_to_unit(stream_words(seed, j, i, 2 * slot))
    return _scalar(_TWO_PI * u, j, i)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for replicate ``index``; independent of every feature stream."""
    w = stream_words(seed, index, 0, 2 * SLOT_SEED)
    return int(np.asarray(w).reshape(-1)[0])
