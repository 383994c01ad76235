"""Request-policy taxonomy.

Every policy is work-conserving: a new request is issued the instant an
update is received, and the wait until the next event is
``min(threshold, service)``.  ``ZeroWait`` is the non-preemptive member
(threshold infinity); ``XMinThreshold`` re-requests every ``support_min``
time units; ``MedianThreshold`` is sugar for a fixed threshold at the
service-time median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "FixedThreshold",
    "ZeroWait",
    "XMinThreshold",
    "MedianThreshold",
    "RepetitiveSequence",
    "RandomizedThreshold",
    "Policy",
    "ThresholdSampler",
    "PointSampler",
    "UniformSampler",
    "ChoiceSampler",
    "TriangularSampler",
]


@dataclass(frozen=True)
class FixedThreshold:
    theta: float

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("threshold must be nonnegative")

    def label(self) -> str:
        return f"fixed({self.theta:g})"


@dataclass(frozen=True)
class ZeroWait:
    def label(self) -> str:
        return "zero-wait"


@dataclass(frozen=True)
class XMinThreshold:
    def label(self) -> str:
        return "xmin-threshold"


@dataclass(frozen=True)
class MedianThreshold:
    def label(self) -> str:
        return "median-threshold"


@dataclass(frozen=True)
class RepetitiveSequence:
    """Deterministic threshold sequence, restarted after every reception.

    The last entry repeats forever once the sequence is exhausted.
    """

    thresholds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if not self.thresholds:
            raise ValueError("threshold sequence must be nonempty")
        if any(not math.isfinite(t) or t < 0 for t in self.thresholds):
            raise ValueError("thresholds must be finite and nonnegative")

    def threshold_for_attempt(self, r: int) -> float:
        """Threshold used by the r-th request (1-based) since the last reception."""
        return self.thresholds[min(r, len(self.thresholds)) - 1]

    def label(self) -> str:
        return "repetitive[" + ",".join(f"{t:g}" for t in self.thresholds) + "]"


class ThresholdSampler:
    """Base for i.i.d. per-request threshold samplers."""

    def draw(self, rng: np.random.Generator) -> float:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class PointSampler(ThresholdSampler):
    value: float

    def draw(self, rng):
        return self.value

    def label(self):
        return f"point({self.value:g})"


@dataclass(frozen=True)
class UniformSampler(ThresholdSampler):
    low: float
    high: float

    def __post_init__(self):
        if not 0 <= self.low < self.high:
            raise ValueError("need 0 <= low < high")

    def draw(self, rng):
        return rng.uniform(self.low, self.high)

    def label(self):
        return f"uniform({self.low:g},{self.high:g})"


@dataclass(frozen=True)
class ChoiceSampler(ThresholdSampler):
    values: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.values) != len(self.weights) or not self.values:
            raise ValueError("values and weights must be nonempty and equal length")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    def draw(self, rng):
        u = rng.random()
        acc = 0.0
        for v, w in zip(self.values, self.weights):
            acc += w
            if u <= acc:
                return v
        return self.values[-1]

    def label(self):
        return "choice[" + ",".join(f"{v:g}" for v in self.values) + "]"


@dataclass(frozen=True)
class TriangularSampler(ThresholdSampler):
    low: float
    mode: float
    high: float

    def __post_init__(self):
        if not 0 <= self.low <= self.mode <= self.high or self.low == self.high:
            raise ValueError("need 0 <= low <= mode <= high with low < high")

    def draw(self, rng):
        return rng.triangular(self.low, self.mode, self.high)

    def label(self):
        return f"triangular({self.low:g},{self.mode:g},{self.high:g})"


@dataclass(frozen=True)
class RandomizedThreshold:
    """Draws a fresh threshold for every request, i.i.d. from ``sampler``."""

    sampler: ThresholdSampler

    def label(self) -> str:
        return f"randomized[{self.sampler.label()}]"


Policy = Union[
    FixedThreshold,
    ZeroWait,
    XMinThreshold,
    MedianThreshold,
    RepetitiveSequence,
    RandomizedThreshold,
]
