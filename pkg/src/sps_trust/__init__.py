"""Fuzzy trust and reputation for social participatory sensing."""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config
from .fuzzy import FuzzyEngine, evaluate_toc
from .reputation import TrustMatrix, UpdatePolicy, compute_reputation, update_trust
from .simulator import run_scenario

__all__ = [
    "FuzzyEngine",
    "evaluate_toc",
    "TrustMatrix",
    "UpdatePolicy",
    "compute_reputation",
    "update_trust",
    "ScenarioConfig",
    "load_config",
    "run_scenario",
]
