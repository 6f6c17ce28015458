"""CSV and manifest output for simulation runs."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .simulator import ScenarioResult

OVERALL_TRUST_HEADER = ("campaign", "method", "requester_category", "overall_trust")
REPUTATION_HEADER = ("interval", "member_id", "category", "method", "reputation")
SUMMARY_HEADER = (
    "method",
    "mean_overall_trust",
    "mean_overall_trust_a_requesters",
    "mean_overall_trust_b_requesters",
    "undefined_campaigns",
    "revoked_fraction",
    "final_reputation_mean_a",
    "final_reputation_mean_b",
    "reputation_separation",
)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or math.isnan(x):
        return ""  # undefined, e.g. every contribution revoked
    return f"{x:.10f}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_overall_trust(path: Path, results: Sequence[ScenarioResult]):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(OVERALL_TRUST_HEADER)
        for res in results:
            for k in range(len(res.overall_trust)):
                w.writerow([k, res.method, res.requester_category[k], _fmt(res.overall_trust[k])])


def write_reputation(path: Path, results: Sequence[ScenarioResult]):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(REPUTATION_HEADER)
        for res in results:
            for interval, row in enumerate(res.reputation):
                for m, rep in enumerate(row):
                    w.writerow([interval, m, res.categories[m], res.method, _fmt(float(rep))])


def write_summary(path: Path, results: Sequence[ScenarioResult]):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(SUMMARY_HEADER)
        for res in results:
            s = res.summary()
            w.writerow([s["method"]] + [_fmt(s[k]) for k in SUMMARY_HEADER[1:]])


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_run(out_dir: Path, results: Sequence[ScenarioResult]) -> dict:
    """Write the three CSVs and ``manifest.json``; returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "overall_trust.csv": write_overall_trust,
        "reputation.csv": write_reputation,
        "summary.csv": write_summary,
    }
    for name, fn in files.items():
        fn(out_dir / name, results)
    cfg = results[0].cfg
    manifest = {
        "package": "sps_trust",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": cfg.seed,
        "scenario": cfg.scenario,
        "methods": [r.method for r in results],
        "config": cfg.to_dict(),
        "pagerank_max_iterations": {r.method: max(r.pagerank_iterations, default=0) for r in results},
        "files": {name: sha256(out_dir / name) for name in files},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
