"""Campaign simulation over a fully connected social group.

Each campaign has one requester (members take turns in index order); every
other member may contribute. A contribution's ToP mixes the participant's
personal factors (expertise, timeliness, locality; drawn from the
participant's category) with social factors (friendship, interaction gap;
drawn from the requester's category, i.e. how the group scores the
requester). QoC is ToP plus uniform noise, and ToC comes from one of three
methods. Contributions with ToC below the revocation threshold are dropped
from the campaign's overall trust, every contribution updates the
requester's trust row, and reputation is recomputed every
``reputation_interval`` campaigns.

Randomness: every member owns a private stream from which it draws a fixed
block of uniforms for every campaign, whether or not it takes part, so a
member's draws never depend on the scenario, the method or anyone else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import METHODS, CategoryProfile, ScenarioConfig
from .fuzzy import FuzzyEngine
from .reputation import TrustMatrix, _rating_from_uniform, link_weights, pagerank, rescale, update_trust
from .trust_eval import combine_top, friendship_score, interaction_score, locality_score, timeliness_score

CATEGORIES = ("A", "B")

# columns of the per-(member, campaign) uniform block
U_PARTICIPATE, U_BAND, U_RT, U_LI_KIND, U_LI_GAP, U_QOC, U_RE = range(7)
N_UNIFORMS = 7

STREAM_TASKS, STREAM_MEMBER, STREAM_INIT = 0, 1, 2


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


# -- per-member draws -------------------------------------------------------


def draw_participation(profile: CategoryProfile, rng: np.random.Generator) -> bool:
    return bool(rng.random() < profile.participation)


def response_time_from_uniforms(profile: CategoryProfile, u_band, u_within):
    """Map uniforms to a response time in days, conditional on contributing.

    The band is picked with probability mass / participation; within a band
    (low, high] the time is uniform.
    """
    lows = np.array([b[0] for b in profile.rt_bands])
    highs = np.array([b[1] for b in profile.rt_bands])
    cum = np.cumsum([b[2] for b in profile.rt_bands]) / profile.participation
    idx = np.minimum(np.searchsorted(cum, np.asarray(u_band) * cum[-1], side="right"), len(cum) - 1)
    return highs[idx] - (highs[idx] - lows[idx]) * np.asarray(u_within)


def draw_response_time(profile: CategoryProfile, rng: np.random.Generator) -> float:
    u = rng.random(2)
    return float(response_time_from_uniforms(profile, u[0], u[1]))


@dataclass
class RunningReputation:
    """Baseline-Rep reputation: running mean of a participant's QoC history,
    seeded with ``prior`` counted as one pseudo-observation."""

    total: float = 0.0
    count: int = 0
    prior: float = 0.5

    @property
    def value(self) -> float:
        return (self.prior + self.total) / (self.count + 1)

    def update(self, qoc: float) -> float:
        self.total += qoc
        self.count += 1
        return self.value


def baseline_toc(rep, qoc):
    return np.sqrt(np.asarray(rep) * np.asarray(qoc))


def baseline_rep_toc(state: RunningReputation, qoc: float) -> float:
    """Fold ``qoc`` into the running reputation, then return sqrt(Rep * QoC)."""
    if not 0.0 <= qoc <= 1.0:
        raise ValueError("qoc must lie in [0, 1]")
    return float(baseline_toc(state.update(qoc), qoc))


def chebyshev_rings(grid: int, homes) -> np.ndarray:
    """Distance of every grid cell (row-major) to the nearest home cell."""
    rows, cols = np.divmod(np.arange(grid * grid), grid)
    hr, hc = np.divmod(np.asarray(homes), grid)
    d = np.maximum(np.abs(rows[:, None] - hr[None, :]), np.abs(cols[:, None] - hc[None, :]))
    return d.min(axis=1)


def locality_counts(profile: CategoryProfile, ring_draws, rings: np.ndarray, home_count: float) -> np.ndarray:
    """Sample counts: home cells get ``home_count``, ring k gets ``home_count * N_k``."""
    n_k = np.asarray(ring_draws, dtype=float) * np.asarray(profile.ring_max)
    scale = np.concatenate([[1.0], n_k, np.zeros(max(0, rings.max() - 3))])
    return home_count * scale[rings]


# -- population --------------------------------------------------------------


@dataclass
class Population:
    cfg: ScenarioConfig
    category: np.ndarray  # 0 = A, 1 = B (base category)
    transitioned: np.ndarray  # bool
    expertise_order: np.ndarray  # (N, areas): member's areas, PE = first n_expertise
    homes: np.ndarray  # (N, home_regions)
    locality: np.ndarray  # (2, N, regions) counts under the A and B profiles
    locality_scores: np.ndarray  # (2, N, regions)
    friendship_offset: np.ndarray  # (N, N) years drawn within the profile's interval, per (requester, participant)
    friendship_accrued: np.ndarray  # (N, N) years accrued through participation
    last_interaction: np.ndarray  # (N, N) day of the latest requester/participant interaction
    abstainer: np.ndarray  # bool, used only in "fixed" participation mode
    trust: TrustMatrix
    reputation: np.ndarray
    qoc_sum: np.ndarray
    qoc_count: np.ndarray

    @property
    def n(self) -> int:
        return len(self.category)

    def profile_index(self, campaign: int) -> np.ndarray:
        """Per-member active profile (0 = A, 1 = B) at ``campaign``."""
        prof = self.category.copy()
        cfg = self.cfg
        if cfg.scenario == 2 and cfg.transition_start <= campaign < cfg.transition_end:
            prof[self.transitioned] = 1
        return prof

    def friendship_years(self, requester: int, participants, profile: int) -> np.ndarray:
        lo, hi = (self.cfg.profile_a, self.cfg.profile_b)[profile].friendship_years
        return lo + (hi - lo) * self.friendship_offset[requester, participants] + self.friendship_accrued[
            requester, participants
        ]


def init_population(cfg: ScenarioConfig) -> Population:
    n, regions = cfg.n_members, cfg.n_regions
    category = np.where(np.arange(n) < cfg.category_a_size, 0, 1)
    transitioned = np.zeros(n, dtype=bool)
    if cfg.scenario == 2:
        transitioned[: cfg.transition_members] = True
    order = np.empty((n, cfg.n_expertise_areas), dtype=int)
    homes = np.empty((n, cfg.home_regions), dtype=int)
    counts = np.empty((2, n, regions))
    offsets = np.empty((n, n))
    abstain_u = np.empty(n)
    for m in range(n):
        rng = _stream(cfg.seed, STREAM_INIT, m)
        order[m] = rng.permutation(cfg.n_expertise_areas)
        homes[m] = rng.choice(regions, size=cfg.home_regions, replace=False)
        rings = chebyshev_rings(cfg.grid_size, homes[m])
        ring_u = rng.random(3)
        for p, prof in enumerate((cfg.profile_a, cfg.profile_b)):
            counts[p, m] = locality_counts(prof, ring_u, rings, cfg.home_count)
        offsets[m] = rng.random(n)
        abstain_u[m] = rng.random()
    scores = np.empty_like(counts)
    for p in range(2):
        for m in range(n):
            if cfg.locality_scale == "share":
                scores[p, m] = [locality_score(counts[p, m], i) for i in range(regions)]
            else:
                scores[p, m] = counts[p, m] / counts[p, m].max()
    participation = np.where(category == 0, cfg.profile_a.participation, cfg.profile_b.participation)
    trust = TrustMatrix(n, cfg.initial_trust)
    return Population(
        cfg=cfg,
        category=category,
        transitioned=transitioned,
        expertise_order=order,
        homes=homes,
        locality=counts,
        locality_scores=scores,
        friendship_offset=offsets,
        friendship_accrued=np.zeros((n, n)),
        last_interaction=np.zeros((n, n)),
        abstainer=abstain_u >= participation,
        trust=trust,
        reputation=np.full(n, cfg.initial_reputation),
        qoc_sum=np.zeros(n),
        qoc_count=np.zeros(n, dtype=int),
    )


# -- campaigns ---------------------------------------------------------------


@dataclass
class Contributions:
    """Column arrays for the contributions of one campaign."""

    campaign: int
    requester: int
    participant: np.ndarray
    expertise: np.ndarray
    timeliness: np.ndarray
    locality: np.ndarray
    friendship: np.ndarray
    interaction: np.ndarray
    top: np.ndarray
    qoc: np.ndarray
    toc: np.ndarray
    revoked: np.ndarray
    method: str

    def __len__(self):
        return len(self.participant)


@dataclass
class CampaignResult:
    campaign: int
    requester: int
    requester_category: str
    contributions: Contributions
    overall_trust: float  # nan when every contribution was revoked

    @property
    def defined(self) -> bool:
        return not math.isnan(self.overall_trust)


def overall_trust(toc: np.ndarray, threshold: float) -> float:
    kept = toc[toc >= threshold]
    return float(kept.mean()) if kept.size else math.nan


class Simulation:
    """One (scenario config, method) run. ``step`` advances one campaign."""

    def __init__(self, cfg: ScenarioConfig, method: str, engine: FuzzyEngine | None = None):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
        self.cfg = cfg
        self.method = method
        self.engine = engine or FuzzyEngine.from_config(cfg.fuzzy)
        self.pop = init_population(cfg)
        n = cfg.n_members
        self.uniforms = np.stack(
            [_stream(cfg.seed, STREAM_MEMBER, m).random((cfg.n_campaigns, N_UNIFORMS)) for m in range(n)]
        )
        tasks = _stream(cfg.seed, STREAM_TASKS)
        self.task_areas = np.argsort(tasks.random((cfg.n_campaigns, cfg.n_expertise_areas)), axis=1)[
            :, : cfg.task_expertise
        ]
        self.task_region = tasks.integers(cfg.n_regions, size=cfg.n_campaigns)
        self.campaign = 0
        self.pagerank_iterations: list[int] = []
        self.pagerank_residuals: list[float] = []

    def requester_of(self, campaign: int) -> int:
        return campaign % self.cfg.n_members

    def willing(self, campaign: int, members: np.ndarray, prof: np.ndarray) -> np.ndarray:
        if self.cfg.participation_mode == "fixed":
            return ~self.pop.abstainer[members]
        p = np.where(prof == 0, self.cfg.profile_a.participation, self.cfg.profile_b.participation)
        return self.uniforms[members, campaign, U_PARTICIPATE] < p

    def evaluate_contributions(self, campaign: int, requester: int, participants: np.ndarray, prof: np.ndarray):
        """Score the given participants' contributions; mutates friendship clocks
        and interaction times but not trust."""
        cfg, pop = self.cfg, self.pop
        u = self.uniforms[participants, campaign]
        pprof = prof[participants]
        rprof = int(prof[requester])
        rprofile = (cfg.profile_a, cfg.profile_b)[rprof]

        n_pe = np.where(pprof == 0, cfg.profile_a.n_expertise, cfg.profile_b.n_expertise)
        ranks = np.argsort(pop.expertise_order[participants], axis=1)  # rank of each area in the member's list
        in_pe = ranks < n_pe[:, None]
        e = in_pe[:, self.task_areas[campaign]].sum(axis=1) / cfg.task_expertise

        rt = np.empty(len(participants))
        for p, profile in enumerate((cfg.profile_a, cfg.profile_b)):
            sel = pprof == p
            rt[sel] = response_time_from_uniforms(profile, u[sel, U_BAND], u[sel, U_RT])
        t = timeliness_score(rt, cfg.timeliness)

        l = pop.locality_scores[pprof, participants, self.task_region[campaign]]

        f = friendship_score(pop.friendship_years(requester, participants, rprof), cfg.friendship)

        recent = u[:, U_LI_KIND] < rprofile.li_recent_prob
        gap = np.where(recent, cfg.li_recent_max_days * (1.0 - u[:, U_LI_GAP]), cfg.li_stale_gap_days)
        i = interaction_score(gap, cfg.interaction)

        top = combine_top(e, t, l, f, i, cfg.weights)
        qoc = np.clip(top + (2.0 * u[:, U_QOC] - 1.0) * cfg.qoc_noise, 0.0, 1.0)

        if self.method == "fuzzy":
            toc = self.engine.evaluate_many(qoc, top)
        elif self.method == "average":
            toc = (top + qoc) / 2.0
        else:
            # vectorised RunningReputation.update; participants are distinct
            pop.qoc_sum[participants] += qoc
            pop.qoc_count[participants] += 1
            rep = (cfg.initial_reputation + pop.qoc_sum[participants]) / (pop.qoc_count[participants] + 1)
            toc = baseline_toc(rep, qoc)

        now = campaign * cfg.campaign_days
        pop.friendship_accrued[requester, participants] += cfg.friendship_step_years
        pop.last_interaction[requester, participants] = now

        return Contributions(
            campaign=campaign,
            requester=requester,
            participant=participants,
            expertise=e,
            timeliness=t,
            locality=l,
            friendship=f,
            interaction=i,
            top=top,
            qoc=qoc,
            toc=toc,
            revoked=toc < cfg.revocation_threshold,
            method=self.method,
        )

    def step(self) -> CampaignResult:
        cfg, pop = self.cfg, self.pop
        k = self.campaign
        if k >= cfg.n_campaigns:
            raise RuntimeError("all campaigns already run")
        r = self.requester_of(k)
        prof = pop.profile_index(k)
        others = np.delete(np.arange(cfg.n_members), r)
        participants = others[self.willing(k, others, prof[others])]
        contrib = self.evaluate_contributions(k, r, participants, prof)

        rho_req = pop.reputation[r]
        if cfg.subjective_ratings:
            re = _rating_from_uniform(contrib.toc, rho_req, self.uniforms[participants, k, U_RE])
        else:
            re = contrib.toc
        pop.trust.values[r, participants] = update_trust(
            pop.trust.values[r, participants], contrib.toc, re, rho_req, cfg.policy
        )

        result = CampaignResult(
            campaign=k,
            requester=r,
            requester_category=CATEGORIES[pop.category[r]],
            contributions=contrib,
            overall_trust=overall_trust(contrib.toc, cfg.revocation_threshold),
        )
        self.campaign += 1
        if self.campaign % cfg.reputation_interval == 0:
            self.update_reputation()
        return result

    def update_reputation(self) -> np.ndarray:
        pop = self.pop
        res = pagerank(link_weights(pop.trust), pop.reputation, self.cfg.pagerank_tol, self.cfg.pagerank_max_iter)
        self.pagerank_iterations.append(res.iterations)
        self.pagerank_residuals.append(res.residual)
        pop.reputation = rescale(res.raw)
        return pop.reputation


def run_campaign(sim: Simulation) -> CampaignResult:
    return sim.step()


@dataclass
class ScenarioResult:
    cfg: ScenarioConfig
    method: str
    requester: np.ndarray
    requester_category: np.ndarray  # "A"/"B" per campaign
    overall_trust: np.ndarray  # nan for campaigns with every contribution revoked
    n_contributions: np.ndarray
    n_revoked: np.ndarray
    reputation: np.ndarray  # (intervals + 1, N); row j is the state after j * interval campaigns
    categories: np.ndarray  # "A"/"B" per member
    transitioned: np.ndarray
    pagerank_iterations: list[int]
    pagerank_residuals: list[float]
    contributions: list[Contributions] = field(default_factory=list)

    def reputation_at(self, campaign: int) -> np.ndarray:
        interval = self.cfg.reputation_interval
        if campaign % interval:
            raise ValueError(f"reputation is only recorded every {interval} campaigns")
        return self.reputation[campaign // interval]

    def mean_overall_trust(self, mask=None) -> float:
        vals = self.overall_trust if mask is None else self.overall_trust[mask]
        vals = vals[~np.isnan(vals)]
        return float(vals.mean()) if vals.size else math.nan

    def summary(self) -> dict:
        final = self.reputation[-1]
        a, b = final[self.categories == "A"], final[self.categories == "B"]
        return {
            "method": self.method,
            "mean_overall_trust": self.mean_overall_trust(),
            "mean_overall_trust_a_requesters": self.mean_overall_trust(self.requester_category == "A"),
            "mean_overall_trust_b_requesters": self.mean_overall_trust(self.requester_category == "B"),
            "undefined_campaigns": int(np.isnan(self.overall_trust).sum()),
            "revoked_fraction": float(self.n_revoked.sum() / max(1, self.n_contributions.sum())),
            "final_reputation_mean_a": float(a.mean()) if a.size else math.nan,
            "final_reputation_mean_b": float(b.mean()) if b.size else math.nan,
            "reputation_separation": float(a.mean() - b.mean()) if a.size and b.size else math.nan,
        }


def run_scenario(cfg: ScenarioConfig, method: str, keep_contributions: bool = False) -> ScenarioResult:
    sim = Simulation(cfg, method)
    n = cfg.n_campaigns
    requester = np.empty(n, dtype=int)
    rcat = np.empty(n, dtype="<U1")
    ot = np.empty(n)
    n_contrib = np.empty(n, dtype=int)
    n_rev = np.empty(n, dtype=int)
    snapshots = [sim.pop.reputation.copy()]
    kept = []
    for k in range(n):
        res = sim.step()
        requester[k] = res.requester
        rcat[k] = res.requester_category
        ot[k] = res.overall_trust
        n_contrib[k] = len(res.contributions)
        n_rev[k] = int(res.contributions.revoked.sum())
        if keep_contributions:
            kept.append(res.contributions)
        if sim.campaign % cfg.reputation_interval == 0:
            snapshots.append(sim.pop.reputation.copy())
    return ScenarioResult(
        cfg=cfg,
        method=method,
        requester=requester,
        requester_category=rcat,
        overall_trust=ot,
        n_contributions=n_contrib,
        n_revoked=n_rev,
        reputation=np.array(snapshots),
        categories=np.array([CATEGORIES[c] for c in sim.pop.category]),
        transitioned=sim.pop.transitioned.copy(),
        pagerank_iterations=sim.pagerank_iterations,
        pagerank_residuals=sim.pagerank_residuals,
        contributions=kept,
    )
