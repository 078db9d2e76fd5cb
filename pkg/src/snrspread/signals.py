"""Sparse-signal models: supports and nonzero-magnitude draws.

A sparse signal is the pair (support, magnitudes): a sorted index set of size
K inside an ambient dimension N, and the K nonzero values placed on it.
Supports can be enumerated exhaustively (lexicographic order, budget capped),
unranked directly for partitioned enumeration, or sampled uniformly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterator

import numpy as np

from .linalg import RandomStream

__all__ = [
    "BudgetExceededError",
    "SparseSignal",
    "MagnitudeModel",
    "support_count",
    "enumerate_supports",
    "unrank_support",
    "sample_support",
    "sample_supports",
    "draw_magnitudes",
    "save_signal",
    "load_signal",
]

DEFAULT_ENUMERATION_BUDGET = 10**7

MAGNITUDE_KINDS = ("equal", "gaussian", "uniform")


class BudgetExceededError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its budget."""


@dataclass(frozen=True)
class MagnitudeModel:
    """How the K nonzero values are chosen.

    kind:
        "equal"    -- every entry is sqrt(total_power / K)
        "gaussian" -- i.i.d. normal, variance total_power / K
        "uniform"  -- i.i.d. uniform on +-sqrt(3 * total_power / K)

    All three satisfy E{||x||^2} = total_power (exactly for "equal").
    """

    kind: str
    total_power: float = 1.0

    def __post_init__(self):
        if self.kind not in MAGNITUDE_KINDS:
            raise ValueError(f"unknown magnitude model {self.kind!r}")
        if not (self.total_power > 0 and math.isfinite(self.total_power)):
            raise ValueError("total_power must be positive and finite")


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """K-sparse signal in dimension ``n``: sorted support plus magnitudes."""

    n: int
    support: tuple[int, ...]
    magnitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        sup = tuple(int(i) for i in self.support)
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if mags.ndim != 1 or mags.shape[0] != len(sup):
            raise ValueError("magnitudes must be 1-D with one value per support index")
        if len(sup) > self.n:
            raise ValueError("support larger than ambient dimension")
        if any(not 0 <= i < self.n for i in sup):
            raise ValueError("support indices out of range")
        if any(a >= b for a, b in zip(sup, sup[1:])):
            raise ValueError("support must be strictly increasing")
        if not np.all(np.isfinite(mags)):
            raise ValueError("magnitudes must be finite")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "magnitudes", mags)

    @property
    def k(self) -> int:
        return len(self.support)

    def dense(self) -> np.ndarray:
        """Dense length-``n`` vector with the magnitudes on the support."""
        x = np.zeros(self.n, dtype=np.float64)
        if self.support:
            x[list(self.support)] = self.magnitudes
        return x

    def power(self) -> float:
        """Squared l2 norm of the signal."""
        return float(self.magnitudes @ self.magnitudes)


def support_count(n: int, k: int) -> int:
    """Number of K-subsets of {0..n-1}."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    return math.comb(n, k)


def enumerate_supports(
    n: int, k: int, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Yield every K-subset of {0..n-1} exactly once, lexicographically.

    Raises :class:`BudgetExceededError` up front when C(n, k) exceeds
    ``budget``; callers should fall back to sampling in that case.
    """
    total = support_count(n, k)
    if total > budget:
        raise BudgetExceededError(
            f"C({n},{k}) = {total} exceeds the enumeration budget {budget}; "
            "use sampled supports instead"
        )
    return iter(combinations(range(n), k))


def unrank_support(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The ``rank``-th K-subset in lexicographic order (0-based).

    Lets parallel workers enumerate disjoint index ranges without sharing an
    iterator.
    """
    total = support_count(n, k)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range [0, {total})")
    out = []
    r = rank
    c = 0
    for slot in range(k):
        while True:
            below = math.comb(n - 1 - c, k - slot - 1)
            if r < below:
                out.append(c)
                c += 1
                break
            r -= below
            c += 1
    return tuple(out)


def sample_supports(n: int, k: int, count: int, stream: RandomStream) -> np.ndarray:
    """``count`` independent uniform K-subsets, one sorted row each.

    Uses rejection on K-tuples when collisions are rare (K^2 < n) and a
    random-key selection otherwise, so the cost stays near count*K draws in
    the sparse regime the experiments live in.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0 or k == 0:
        return np.empty((count, k), dtype=np.int64)
    if k == n:
        return np.tile(np.arange(n, dtype=np.int64), (count, 1))
    if k * k >= n:
        keys = stream.uniform01(count * n).reshape(count, n)
        idx = np.argpartition(keys, k - 1, axis=1)[:, :k]
        return np.sort(idx, axis=1).astype(np.int64)
    idx = stream.integers(count * k, n).reshape(count, k)
    while True:
        idx.sort(axis=1)
        bad = (np.diff(idx, axis=1) == 0).any(axis=1)
        n_bad = int(bad.sum())
        if n_bad == 0:
            return idx
        idx[bad] = stream.integers(n_bad * k, n).reshape(n_bad, k)


def sample_support(n: int, k: int, stream: RandomStream) -> tuple[int, ...]:
    """One uniform K-subset of {0..n-1}, sorted."""
    return tuple(int(i) for i in sample_supports(n, k, 1, stream)[0])


def draw_magnitudes(model: MagnitudeModel, k: int, stream: RandomStream) -> np.ndarray:
    """Draw the K nonzero values according to ``model``.

    The "equal" model consumes no randomness.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p_s = model.total_power
    if model.kind == "equal":
        return np.full(k, math.sqrt(p_s / k), dtype=np.float64)
    if model.kind == "gaussian":
        return math.sqrt(p_s / k) * stream.standard_normal(k)
    half_width = math.sqrt(3.0 * p_s / k)
    return half_width * (2.0 * stream.uniform01(k) - 1.0)


def save_signal(signal: SparseSignal, path) -> None:
    """Write a signal as JSON {N, support, magnitudes}."""
    payload = {
        "N": signal.n,
        "support": list(signal.support),
        "magnitudes": [float(v) for v in signal.magnitudes],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_signal(path) -> SparseSignal:
    """Read a signal written by :func:`save_signal`."""
    payload = json.loads(Path(path).read_text())
    return SparseSignal(
        n=int(payload["N"]),
        support=tuple(int(i) for i in payload["support"]),
        magnitudes=np.asarray(payload["magnitudes"], dtype=np.float64),
    )
