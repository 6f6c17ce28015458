"""Requester-to-participant trust and PageRank-style reputation.

Trust[r, p] is requester r's trust in participant p. Trust rows are
normalised into outgoing link weights and reputation is the fixed point of
rho(p) = sum_r w(r -> p) * rho(r), found by plain power iteration (no
damping), then mapped affinely onto [0.05, 0.95].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, ConvergenceError

INITIAL_TRUST = 0.5
INITIAL_REPUTATION = 0.5
RESCALE_LOW, RESCALE_HIGH = 0.05, 0.95
REPUTATION_HEADER = ("interval", "member_id", "category", "reputation")


@dataclass(frozen=True)
class UpdatePolicy:
    reward_threshold: float = 0.7  # Th1
    penalty_threshold: float = 0.3  # Th2

    def __post_init__(self):
        if not 0.0 <= self.penalty_threshold < self.reward_threshold <= 1.0:
            raise ConfigurationError(
                f"need 0 <= th2 < th1 <= 1, got th1={self.reward_threshold}, th2={self.penalty_threshold}"
            )


class TrustMatrix:
    """Dense N x N requester -> participant trust, clamped to [0, 1]. Diagonal unused."""

    def __init__(self, n: int, initial: float = INITIAL_TRUST):
        if n < 1:
            raise ValueError("need at least one member")
        if not 0.0 <= initial <= 1.0:
            raise ValueError("initial trust must lie in [0, 1]")
        self.values = np.full((n, n), float(initial))
        np.fill_diagonal(self.values, 0.0)

    @classmethod
    def from_array(cls, arr) -> "TrustMatrix":
        arr = np.array(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("trust matrix must be square")
        tm = cls(arr.shape[0])
        tm.values = np.clip(arr, 0.0, 1.0)
        np.fill_diagonal(tm.values, 0.0)
        return tm

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, rp):
        return self.values[rp]

    def set(self, requester: int, participant, value):
        if np.any(np.asarray(participant) == requester):
            raise ValueError("a requester holds no trust value for itself")
        self.values[requester, participant] = np.clip(value, 0.0, 1.0)


def _rating_from_uniform(toc, requester_rep, u):
    mu = 1.0 - np.asarray(requester_rep, dtype=float)
    return np.clip(np.asarray(toc) + (2.0 * np.asarray(u) - 1.0) * mu, 0.0, 1.0)


def subjective_rating(toc: float, requester_rep: float, rng: np.random.Generator) -> float:
    """Requester evaluation drawn uniformly from (ToC - mu, ToC + mu), mu = 1 - rho_Req, clamped."""
    for v, what in ((toc, "toc"), (requester_rep, "requester reputation")):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{what} must lie in [0, 1]")
    if requester_rep == 1.0:
        return float(toc)
    return float(_rating_from_uniform(toc, requester_rep, rng.random()))


def update_trust(current, toc, re, requester_rep, policy: UpdatePolicy = UpdatePolicy()):
    """Reward/penalty step, elementwise over arrays; result clamped to [0, 1]."""
    current = np.asarray(current, dtype=float)
    toc = np.asarray(toc, dtype=float)
    delta = np.abs(toc - requester_rep * np.asarray(re, dtype=float))
    out = np.where(
        toc > policy.reward_threshold,
        current + delta,
        np.where(toc < policy.penalty_threshold, current - delta, current),
    )
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def link_weights(trust) -> np.ndarray:
    """Row-normalised outgoing link weights; all-zero rows become uniform over the others."""
    t = np.array(trust.values if isinstance(trust, TrustMatrix) else trust, dtype=float)
    n = t.shape[0]
    np.fill_diagonal(t, 0.0)
    if np.any(t < 0):
        raise ValueError("trust weights must be nonnegative")
    sums = t.sum(axis=1)
    w = np.empty_like(t)
    live = sums > 0
    w[live] = t[live] / sums[live, None]
    if n > 1:
        w[~live] = 1.0 / (n - 1)
        np.fill_diagonal(w, 0.0)
    else:
        w[~live] = 0.0
    return w


@dataclass
class PageRankResult:
    raw: np.ndarray
    iterations: int
    residual: float


def pagerank(weights: np.ndarray, start, tol: float = 1e-10, max_iter: int = 1_000_000) -> PageRankResult:
    """Iterate rho_k = W^T rho_{k-1} until max |rho_k - rho_{k-1}| <= tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    wt = np.ascontiguousarray(np.asarray(weights, dtype=float).T)
    rho = np.array(start, dtype=float)
    residual = np.inf
    for k in range(1, max_iter + 1):
        nxt = wt @ rho
        residual = float(np.max(np.abs(nxt - rho))) if rho.size else 0.0
        rho = nxt
        if residual <= tol:
            return PageRankResult(rho, k, residual)
    raise ConvergenceError("reputation iteration did not converge", residual, max_iter)


def rescale(raw: np.ndarray, low: float = RESCALE_LOW, high: float = RESCALE_HIGH, rel_tol: float = 1e-8) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        return raw.copy()
    lo, hi = raw.min(), raw.max()
    scale = max(abs(lo), abs(hi), np.finfo(float).tiny)
    if raw.size == 1 or hi - lo <= rel_tol * scale:
        return np.full_like(raw, 0.5)
    return low + (high - low) * (raw - lo) / (hi - lo)


def compute_reputation(
    tm: TrustMatrix | np.ndarray,
    prev=None,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
) -> np.ndarray:
    w = link_weights(tm)
    if prev is None:
        prev = np.full(w.shape[0], INITIAL_REPUTATION)
    return rescale(pagerank(w, prev, tol, max_iter).raw)


def write_reputation_csv(path, rows: Iterable[tuple], method: str | None = None):
    """Write ``interval,member_id,category,reputation`` rows, with a ``method``
    column before ``reputation`` when ``method`` is given."""
    header = list(REPUTATION_HEADER)
    if method is not None:
        header.insert(3, "method")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for interval, member, category, rep in rows:
            row = [interval, member, category, f"{rep:.10f}"]
            if method is not None:
                row.insert(3, method)
            w.writerow(row)
