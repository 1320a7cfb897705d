"""All randomness in one place: keyed deterministic streams and the random draws.

Every stream is derived from a (seed, stream_id) pair plus optional subkeys,
so any draw sequence can be replayed exactly. Draws are built solely on
`random.Random.random()`, whose sequence is stable across Python versions.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import Enum

from .similarity import Measure


class InvalidDrawSize(ValueError):
    """Raised when a measure-subset draw asks for an impossible subset size."""


class LengthMismatch(ValueError):
    """Raised when weighted aggregation receives the wrong number of weights."""


def derive_key(*parts: int | str) -> int:
    """Collapse a mixed tuple of ints and strings into a stable 128-bit integer.

    Used to key child streams and derived seeds; blake2b keeps the result
    independent of Python's per-process string hashing.
    """
    digest = hashlib.blake2b(digest_size=16)
    for part in parts:
        if isinstance(part, str):
            raw = part.encode("utf-8")
            digest.update(b"s")
        else:
            raw = int(part).to_bytes(16, "big", signed=True)
            digest.update(b"i")
        digest.update(len(raw).to_bytes(2, "big"))
        digest.update(raw)
    return int.from_bytes(digest.digest(), "big")


class RngStream:
    """A single-owner random stream identified by (seed, stream_id, *subkeys).

    Identical identifiers always reproduce the identical draw sequence;
    distinct stream ids give independent sequences. Never share one instance
    between concurrent activities; derive substreams instead.
    """

    __slots__ = ("seed", "stream_id", "subkeys", "_random")

    def __init__(self, seed: int, stream_id: int = 0, subkeys: tuple[int | str, ...] = ()):
        self.seed = seed
        self.stream_id = stream_id
        self.subkeys = subkeys
        self._random = random.Random(derive_key("reflex-sm", seed, stream_id, *subkeys))

    def substream(self, *subkeys: int | str) -> "RngStream":
        """A fresh stream keyed by this stream's identity plus the given subkeys."""
        return RngStream(self.seed, self.stream_id, self.subkeys + subkeys)

    def uniform(self) -> float:
        """Next variate in [0, 1)."""
        return self._random.random()

    def index(self, n: int) -> int:
        """Next uniform index in [0, n)."""
        if n <= 0:
            raise ValueError("index() needs a positive range")
        i = int(self.uniform() * n)
        return n - 1 if i >= n else i

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, subkeys={self.subkeys!r})"


class AggregationKind(str, Enum):
    MAX = "max"
    AVERAGE = "average"
    WEIGHTED = "weighted"


# Fixed draw order for the three-way aggregation choice.
_KIND_ORDER = (AggregationKind.MAX, AggregationKind.AVERAGE, AggregationKind.WEIGHTED)

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class AggregationFn:
    """One of the three score-combination rules; weighted carries its weights."""

    kind: AggregationKind
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind is AggregationKind.WEIGHTED:
            if not self.weights:
                raise LengthMismatch("weighted aggregation requires a non-empty weight vector")
            if any(w < 0 for w in self.weights):
                raise ValueError("weights must be non-negative")
            total = sum(self.weights)
            if abs(total - 1.0) > _WEIGHT_SUM_TOL:
                raise ValueError(f"weights must sum to 1 (got {total!r})")
        elif self.weights is not None:
            raise ValueError(f"{self.kind.value} aggregation takes no weights")

    @classmethod
    def max(cls) -> "AggregationFn":
        return cls(AggregationKind.MAX)

    @classmethod
    def average(cls) -> "AggregationFn":
        return cls(AggregationKind.AVERAGE)

    @classmethod
    def weighted(cls, weights: tuple[float, ...]) -> "AggregationFn":
        return cls(AggregationKind.WEIGHTED, tuple(weights))


@dataclass(frozen=True)
class ThresholdInterval:
    """The interval acceptance thresholds are drawn from."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(f"threshold interval must satisfy 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")


def draw_measures(rng: RngStream, pool: frozenset[Measure] | set[Measure], k: int) -> frozenset[Measure]:
    """Uniformly random k-subset of the measure pool, without replacement."""
    items = sorted(pool, key=lambda m: m.value)
    n = len(items)
    if not 1 <= k <= n:
        raise InvalidDrawSize(f"subset size {k} out of range for a pool of {n} measures")
    for i in range(k):
        j = i + rng.index(n - i)
        items[i], items[j] = items[j], items[i]
    return frozenset(items[:k])


def draw_aggregation(rng: RngStream, n_scores: int) -> AggregationFn:
    """Uniform choice among max/average/weighted; weighted gets fresh normalized weights."""
    if n_scores < 1:
        raise ValueError("n_scores must be positive")
    kind = _KIND_ORDER[rng.index(len(_KIND_ORDER))]
    if kind is not AggregationKind.WEIGHTED:
        return AggregationFn(kind)
    raw = [rng.uniform() for _ in range(n_scores)]
    total = sum(raw)
    if total == 0.0:
        weights = tuple(1.0 / n_scores for _ in raw)
    else:
        weights = tuple(w / total for w in raw)
    return AggregationFn.weighted(weights)


def aggregate(fn: AggregationFn, scores: list[float] | tuple[float, ...]) -> float:
    """Combine measure scores into one value per the aggregation rule."""
    if not scores:
        raise ValueError("cannot aggregate an empty score list")
    if fn.kind is AggregationKind.MAX:
        return max(scores)
    if fn.kind is AggregationKind.AVERAGE:
        return sum(scores) / len(scores)
    assert fn.weights is not None
    if len(fn.weights) != len(scores):
        raise LengthMismatch(f"{len(fn.weights)} weights cannot aggregate {len(scores)} scores")
    return sum(w * s for w, s in zip(fn.weights, scores))


def draw_threshold(rng: RngStream, interval: ThresholdInterval) -> float:
    """Uniform variate in [lo, hi); a degenerate interval returns lo exactly."""
    if interval.hi == interval.lo:
        return interval.lo
    return interval.lo + (interval.hi - interval.lo) * rng.uniform()
