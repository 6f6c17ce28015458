"""Built-in consistency checks: the four-member PageRank example and the fuzzy prototypes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fuzzy import FuzzyEngine
from .reputation import compute_reputation, link_weights, pagerank

FOUR_MEMBER_DEFAULT = {"T21": 0.6, "T32": 0.7, "T13": 0.8, "T14": 0.2, "T24": 0.4, "T34": 0.3}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def four_member_trust(weights: dict[str, float] | None = None) -> np.ndarray:
    """Trust matrix for links 2->1, 3->2, 1->3 and 1, 2, 3 -> 4 (1-based names)."""
    w = {**FOUR_MEMBER_DEFAULT, **(weights or {})}
    t = np.zeros((4, 4))
    for key, val in w.items():
        src, dst = int(key[1]) - 1, int(key[2]) - 1
        t[src, dst] = val
    return t


def four_member_residuals(weights: dict[str, float] | None = None, tol: float = 1e-10):
    """Residuals of the four fixed-point equations at the converged iterate.

    Member 4 has no outgoing links, so its row is spread uniformly over
    members 1-3; that share appears in the first three equations.
    """
    w = link_weights(four_member_trust(weights))
    res = pagerank(w, np.full(4, 0.5), tol=tol)
    p = res.raw
    share = w[3, 0] * p[3]
    resid = np.array(
        [
            p[0] - (w[1, 0] * p[1] + share),
            p[1] - (w[2, 1] * p[2] + share),
            p[2] - (w[0, 2] * p[0] + share),
            p[3] - (w[0, 3] * p[0] + w[1, 3] * p[1] + w[2, 3] * p[2]),
        ]
    )
    return resid, res


def prototype_levels(engine: FuzzyEngine) -> dict[str, list[float]]:
    """ToC at every (QoC core, ToP core) pair grouped by the rule's consequent."""
    out: dict[str, list[float]] = {label: [] for label in engine.toc.labels}
    for q, p in itertools.product(engine.qoc.labels, engine.top.labels):
        toc = engine.evaluate(engine.qoc.core_center(q), engine.top.core_center(p))
        out[engine.rules.consequent(q, p)].append(toc)
    return {k: v for k, v in out.items() if v}


def run_checks(weights: dict[str, float] | None = None, engine: FuzzyEngine | None = None) -> list[Check]:
    engine = engine or FuzzyEngine.default()
    checks = []

    resid, res = four_member_residuals(weights)
    worst = float(np.max(np.abs(resid)))
    checks.append(
        Check(
            "four-member fixed point",
            worst <= 1e-9 and res.residual <= 1e-10,
            f"max residual {worst:.2e}, {res.iterations} iterations",
        )
    )

    n = 5
    rep = compute_reputation(np.full((n, n), 0.8))
    checks.append(Check("complete graph uniform", bool(np.all(rep == rep[0])), f"reputations {np.unique(rep)}"))

    levels = prototype_levels(engine)
    order = [label for label in engine.toc.labels if label in levels]
    ok = all(max(levels[a]) < min(levels[b]) for a, b in zip(order, order[1:]))
    span = ", ".join(f"{k}=[{min(v):.3f},{max(v):.3f}]" for k, v in levels.items())
    checks.append(Check("fuzzy prototype ordering", ok, span))
    return checks


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    return "\n".join(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}" for c in checks)
