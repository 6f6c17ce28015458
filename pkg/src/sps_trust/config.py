"""Scenario configuration.

Defaults describe the standard 100-member, two-category setup. A YAML file may override
any subset of fields (nested mappings for ``profile_a``, ``profile_b``,
``timeliness``, ``weights``, ``fuzzy``); command-line flags override the file.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigurationError
from .reputation import UpdatePolicy
from .trust_eval import GompertzParams, TimelinessParams, TopWeights

METHODS = ("fuzzy", "average", "baseline")


@dataclass(frozen=True)
class CategoryProfile:
    """Per-category draw settings.

    ``rt_bands`` holds (low, high, mass) with unconditional masses; they sum
    to ``participation`` so the response time, given that the member
    contributes, falls in a band with probability mass / participation.
    Ring counts are ``home_count * N_k`` with ``N_k ~ U(0, ring_max[k])``.
    """

    participation: float
    n_expertise: int
    rt_bands: tuple[tuple[float, float, float], ...]
    ring_max: tuple[float, float, float]
    friendship_years: tuple[float, float]
    li_recent_prob: float

    def __post_init__(self):
        object.__setattr__(self, "rt_bands", tuple(tuple(map(float, b)) for b in self.rt_bands))
        object.__setattr__(self, "ring_max", tuple(map(float, self.ring_max)))
        object.__setattr__(self, "friendship_years", tuple(map(float, self.friendship_years)))
        if not 0.0 < self.participation <= 1.0:
            raise ConfigurationError(f"participation must be in (0, 1], got {self.participation}")
        if not 0.0 <= self.li_recent_prob <= 1.0:
            raise ConfigurationError("li_recent_prob must be a probability")
        if not self.rt_bands:
            raise ConfigurationError("rt_bands must be non-empty")
        prev_hi = 0.0
        for lo, hi, mass in self.rt_bands:
            if not (lo == prev_hi and hi > lo and mass >= 0):
                raise ConfigurationError(f"rt_bands must be contiguous from 0 with positive width: {self.rt_bands}")
            prev_hi = hi
        total = math.fsum(m for _, _, m in self.rt_bands)
        if abs(total - self.participation) > 1e-9:
            raise ConfigurationError(f"rt band masses sum to {total}, expected participation {self.participation}")
        if len(self.ring_max) != 3 or any(not 0.0 <= r <= 1.0 for r in self.ring_max):
            raise ConfigurationError("ring_max needs three values in [0, 1]")
        lo, hi = self.friendship_years
        if not 0.0 <= lo <= hi:
            raise ConfigurationError("friendship_years must be an interval of nonnegative years")


PROFILE_A = CategoryProfile(
    participation=0.9,
    n_expertise=4,
    rt_bands=((0.0, 1.0, 0.4), (1.0, 3.5, 0.25), (3.5, 7.0, 0.25)),
    ring_max=(1.0, 0.9, 0.8),
    friendship_years=(4.0, 5.0),
    li_recent_prob=0.8,
)

PROFILE_B = CategoryProfile(
    participation=0.5,
    n_expertise=2,
    rt_bands=((0.0, 1.0, 0.1), (1.0, 3.5, 0.2), (3.5, 7.0, 0.2)),
    ring_max=(0.5, 0.0, 0.0),
    friendship_years=(0.0, 1.0),
    li_recent_prob=0.2,
)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: int = 1
    seed: int = 0
    n_members: int = 100
    n_campaigns: int = 5000
    category_a_size: int = 60
    profile_a: CategoryProfile = PROFILE_A
    profile_b: CategoryProfile = PROFILE_B
    participation_mode: str = "bernoulli"  # or "fixed": a fixed abstaining subset
    reputation_interval: int = 100
    revocation_threshold: float = 0.5
    qoc_noise: float = 0.1
    # scenario 2: the first ``transition_members`` category-A members behave as
    # category B for campaigns transition_start <= k < transition_end
    transition_members: int = 10
    transition_start: int = 1000
    transition_end: int = 4000
    n_expertise_areas: int = 6
    task_expertise: int = 3
    grid_size: int = 5
    home_regions: int = 3
    home_count: float = 100.0
    locality_scale: str = "share"  # "share" = V(i)/sum(V); "peak" = V(i)/max(V)
    timeliness: TimelinessParams = TimelinessParams()
    friendship: GompertzParams = GompertzParams(5.0, 1.0)
    interaction: GompertzParams = GompertzParams(10.0, 0.2)
    weights: TopWeights = TopWeights()
    friendship_step_years: float = 0.02
    li_recent_max_days: float = 7.0
    li_stale_gap_days: float = 30.0
    campaign_days: float = 1.0
    policy: UpdatePolicy = UpdatePolicy()
    subjective_ratings: bool = True
    initial_trust: float = 0.5
    initial_reputation: float = 0.5
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 1_000_000
    fuzzy: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise ConfigurationError(f"scenario must be 1 or 2, got {self.scenario}")
        if self.n_members < 2:
            raise ConfigurationError("need at least two members")
        if self.n_campaigns < 1:
            raise ConfigurationError(f"n_campaigns must be positive, got {self.n_campaigns}")
        if not 0 <= self.category_a_size <= self.n_members:
            raise ConfigurationError("category_a_size must be within [0, n_members]")
        if self.participation_mode not in ("bernoulli", "fixed"):
            raise ConfigurationError("participation_mode must be 'bernoulli' or 'fixed'")
        if self.reputation_interval < 1:
            raise ConfigurationError("reputation_interval must be positive")
        if not 0.0 <= self.revocation_threshold <= 1.0:
            raise ConfigurationError("revocation_threshold must lie in [0, 1]")
        if not 0.0 <= self.qoc_noise <= 1.0:
            raise ConfigurationError("qoc_noise must lie in [0, 1]")
        if self.scenario == 2:
            if not 0 <= self.transition_members <= self.category_a_size:
                raise ConfigurationError("transition_members must not exceed category_a_size")
            if not 1 <= self.transition_start <= self.transition_end <= self.n_campaigns:
                raise ConfigurationError("transition window must lie within [1, n_campaigns]")
        if not 1 <= self.task_expertise <= self.n_expertise_areas:
            raise ConfigurationError("task_expertise must be within [1, n_expertise_areas]")
        for prof in (self.profile_a, self.profile_b):
            if prof.n_expertise > self.n_expertise_areas:
                raise ConfigurationError("n_expertise exceeds the number of expertise areas")
        if not 1 <= self.home_regions <= self.grid_size**2:
            raise ConfigurationError("home_regions must fit on the grid")
        if self.locality_scale not in ("share", "peak"):
            raise ConfigurationError("locality_scale must be 'share' or 'peak'")
        if not (0 <= self.initial_trust <= 1 and 0 <= self.initial_reputation <= 1):
            raise ConfigurationError("initial trust and reputation must lie in [0, 1]")
        if self.friendship_step_years < 0 or self.li_recent_max_days <= 0 or self.li_stale_gap_days < 0:
            raise ConfigurationError("time constants must be nonnegative")
        if self.pagerank_tol <= 0 or self.pagerank_max_iter < 1:
            raise ConfigurationError("pagerank_tol must be positive and pagerank_max_iter >= 1")

    @property
    def n_regions(self) -> int:
        return self.grid_size**2

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["profile_a"]["rt_bands"] = [list(b) for b in self.profile_a.rt_bands]
        d["profile_b"]["rt_bands"] = [list(b) for b in self.profile_b.rt_bands]
        for key in ("profile_a", "profile_b"):
            d[key]["ring_max"] = list(d[key]["ring_max"])
            d[key]["friendship_years"] = list(d[key]["friendship_years"])
        d["fuzzy"] = dict(self.fuzzy)
        return d


_NESTED = {
    "profile_a": CategoryProfile,
    "profile_b": CategoryProfile,
    "timeliness": TimelinessParams,
    "friendship": GompertzParams,
    "interaction": GompertzParams,
    "weights": TopWeights,
    "policy": UpdatePolicy,
}


def _build(cls, base, values: Mapping, where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f"unknown {where} keys: {sorted(unknown)}")
    try:
        return dataclasses.replace(base, **values)
    except TypeError as exc:
        raise ConfigurationError(f"bad {where} values: {exc}") from None


def config_from_dict(values: Mapping | None, base: ScenarioConfig | None = None) -> ScenarioConfig:
    base = base or ScenarioConfig()
    values = dict(values or {})
    for key, cls in _NESTED.items():
        if key in values:
            sub = values[key]
            if not isinstance(sub, Mapping):
                raise ConfigurationError(f"'{key}' must be a mapping")
            values[key] = _build(cls, getattr(base, key), sub, key)
    if "fuzzy" in values and not isinstance(values["fuzzy"], Mapping):
        raise ConfigurationError("'fuzzy' must be a mapping")
    return _build(ScenarioConfig, base, values, "scenario config")


def load_config(path: str | Path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return config_from_dict(data, base)
