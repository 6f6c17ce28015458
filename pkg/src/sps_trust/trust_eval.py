"""Trust-of-Participant evaluators.

Expertise, timeliness, locality, friendship duration and interaction time
gap, each mapped to [0, 1], and their weighted combination. Timeliness
and interaction gap are measured in days, friendship duration in years.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import AbstractSet, NewType, Sequence

import numpy as np

from .errors import ConfigurationError

Days = NewType("Days", float)
Years = NewType("Years", float)


def _nonneg(value, what):
    arr = np.asarray(value, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError(f"{what} must be >= 0, got {value!r}")
    return arr


@dataclass(frozen=True)
class TimelinessParams:
    floor: float = 0.3  # x
    b: float = 6.0
    c: float = 0.6
    deadline: float = 7.0  # days

    def __post_init__(self):
        if not 0.0 <= self.floor < 1.0:
            raise ConfigurationError(f"timeliness floor must be in [0, 1), got {self.floor}")
        if min(self.b, self.c, self.deadline) <= 0:
            raise ConfigurationError("timeliness b, c and deadline must be positive")


@dataclass(frozen=True)
class GompertzParams:
    b: float
    c: float

    def __post_init__(self):
        if self.b <= 0 or self.c <= 0:
            raise ConfigurationError(f"Gompertz constants must be positive, got b={self.b}, c={self.c}")


FRIENDSHIP = GompertzParams(b=5.0, c=1.0)
INTERACTION = GompertzParams(b=10.0, c=0.2)


@dataclass(frozen=True)
class TopWeights:
    """Weights for (expertise, timeliness, locality, friendship, interaction)."""

    expertise: float = 0.2
    timeliness: float = 0.2
    locality: float = 0.2
    friendship: float = 0.2
    interaction: float = 0.2

    def __post_init__(self):
        w = self.as_tuple()
        if any(x < 0 for x in w):
            raise ConfigurationError(f"ToP weights must be nonnegative: {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ConfigurationError(f"ToP weights must sum to 1, got {math.fsum(w)!r}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.expertise, self.timeliness, self.locality, self.friendship, self.interaction)


def expertise_score(task: AbstractSet, participant: AbstractSet) -> float:
    if not task:
        raise ValueError("task expertise set is empty")
    return len(task & participant) / len(task)


def timeliness_score(t: Days, p: TimelinessParams = TimelinessParams()):
    """Modified inverse Gompertz; zero at and after the deadline.

    Works elementwise on arrays.
    """
    t = _nonneg(t, "response time")
    val = 1.0 - (1.0 - p.floor) * np.exp(-p.b * np.exp(-p.c * t))
    out = np.where(t < p.deadline, val, 0.0)
    return float(out) if out.ndim == 0 else out


def locality_score(counts: Sequence[float], region: int) -> float:
    """Share of the participant's samples that were collected in ``region``."""
    v = np.asarray(counts, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("locality map must be a non-empty vector")
    if np.any(v < 0):
        raise ValueError("locality counts must be nonnegative")
    if not 0 <= region < v.size:
        raise IndexError(f"region {region} outside [0, {v.size})")
    total = math.fsum(v)
    if total <= 0:
        raise ValueError("locality undefined for an empty sample history")
    return float(v[region] / total)


def friendship_score(years: Years, p: GompertzParams = FRIENDSHIP):
    t = _nonneg(years, "friendship duration")
    out = np.exp(-p.b * np.exp(-p.c * t))
    return float(out) if out.ndim == 0 else out


def interaction_score(gap: Days, p: GompertzParams = INTERACTION):
    t = _nonneg(gap, "interaction gap")
    out = -np.expm1(-p.b * np.exp(-p.c * t))
    return float(out) if out.ndim == 0 else out


def combine_top(e, t, l, f, i, w: TopWeights = TopWeights()):
    scores = [np.asarray(s, dtype=float) for s in (e, t, l, f, i)]
    for s in scores:
        if np.any(s < 0) or np.any(s > 1):
            raise ValueError("ToP component scores must lie in [0, 1]")
    out = sum(wk * s for wk, s in zip(w.as_tuple(), scores))
    # convex combination can overshoot 1 by an ulp
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
