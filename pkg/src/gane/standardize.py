"""Running per-dimension standardization with a parallel merge."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RunningStats",
    "std_update",
    "std_update_batch",
    "std_apply",
    "std_merge",
    "EPS",
]

EPS = 1e-8


@dataclass(frozen=True, eq=False)
class RunningStats:
    """Count, mean and sum of squared deviations (``m2``) per dimension."""

    count: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> "RunningStats":
        return cls(0, np.zeros(dim), np.zeros(dim))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def variance(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros(self.dim)
        return self.m2 / self.count

    @property
    def scale(self) -> np.ndarray:
        """Denominator used by :func:`std_apply`."""
        return np.maximum(np.sqrt(self.variance), EPS)

    def __eq__(self, other):
        if not isinstance(other, RunningStats):
            return NotImplemented
        return (
            self.count == other.count
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.m2, other.m2)
        )

    def to_bytes(self) -> bytes:
        return (
            struct.pack("<QI", self.count, self.dim)
            + self.mean.astype("<f8").tobytes()
            + self.m2.astype("<f8").tobytes()
        )

    @classmethod
    def from_bytes(cls, buf: bytes, offset: int = 0) -> tuple["RunningStats", int]:
        count, dim = struct.unpack_from("<QI", buf, offset)
        offset += 12
        mean = np.frombuffer(buf, "<f8", dim, offset).astype(np.float64)
        offset += 8 * dim
        m2 = np.frombuffer(buf, "<f8", dim, offset).astype(np.float64)
        return cls(count, mean, m2), offset + 8 * dim


def _check(stats: RunningStats, x: np.ndarray):
    if x.shape[-1] != stats.dim:
        raise ValueError(f"expected dimension {stats.dim}, got {x.shape[-1]}")


def std_update(stats: RunningStats, observation) -> RunningStats:
    """Welford single-sample update."""
    x = np.asarray(observation, dtype=np.float64)
    _check(stats, x)
    if not np.all(np.isfinite(x)):
        raise ValueError("observation must be finite")
    count = stats.count + 1
    delta = x - stats.mean
    mean = stats.mean + delta / count
    m2 = stats.m2 + delta * (x - mean)
    return RunningStats(count, mean, m2)


def std_update_batch(stats: RunningStats, observations) -> RunningStats:
    """Fold a ``(n, dim)`` block of observations into ``stats``."""
    x = np.asarray(observations, dtype=np.float64)
    _check(stats, x)
    if x.shape[0] == 0:
        return stats
    mean = x.mean(axis=0)
    block = RunningStats(x.shape[0], mean, ((x - mean) ** 2).sum(axis=0))
    return std_merge(stats, block)


def std_merge(a: RunningStats, b: RunningStats) -> RunningStats:
    """Chan et al. pairwise combination of two accumulators."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if b.count == 0:
        return a
    if a.count == 0:
        return b
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n)
    return RunningStats(n, mean, m2)


def std_apply(stats: RunningStats, observation) -> np.ndarray:
    """``(x - mean) / max(std, EPS)``; the zero vector before any update."""
    x = np.asarray(observation, dtype=np.float64)
    _check(stats, x)
    if stats.count == 0:
        return np.zeros_like(x)
    return (x - stats.mean) / stats.scale
