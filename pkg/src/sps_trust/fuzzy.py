"""Mamdani inference mapping (QoC, ToP) to a crisp Trust-of-Contribution.

Trapezoidal fuzzy sets, min for rule firing, max for aggregation and a
centre-of-gravity defuzzifier evaluated with the midpoint rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, EmptyEnvelopeError

DEFAULT_RESOLUTION = 1001
MIN_RESOLUTION = 101

FuzzifiedValue = dict[str, float]


def _check_unit(x: float, what: str = "x") -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{what}={x!r} is outside [0, 1]")
    return x


@dataclass(frozen=True)
class Trapezoid:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        pts = (self.a, self.b, self.c, self.d)
        if not all(0.0 <= p <= 1.0 for p in pts):
            raise ConfigurationError(f"trapezoid breakpoints must lie in [0, 1]: {pts}")
        if not self.a <= self.b <= self.c <= self.d:
            raise ConfigurationError(f"trapezoid breakpoints must be ordered a<=b<=c<=d: {pts}")

    @property
    def breakpoints(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, x):
        """Membership of scalar or array ``x``. No range check; see ``membership_degree``."""
        x = np.asarray(x, dtype=float)
        a, b, c, d = self.breakpoints
        out = np.zeros_like(x)
        # ramps over subnormal widths overflow outside their mask; harmless
        with np.errstate(over="ignore"):
            if b > a:
                out = np.where((x > a) & (x < b), (x - a) / (b - a), out)
            if d > c:
                out = np.where((x > c) & (x < d), (d - x) / (d - c), out)
        # plateau last: a vertical edge at the domain boundary evaluates to 1
        out = np.where((x >= b) & (x <= c), 1.0, out)
        return float(out) if out.ndim == 0 else out


def membership_degree(mf: Trapezoid, x: float) -> float:
    return mf(_check_unit(x))


@dataclass(frozen=True)
class LinguisticVariable:
    """A named family of trapezoidal terms covering [0, 1]."""

    name: str
    terms: tuple[tuple[str, Trapezoid], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((str(t), mf) for t, mf in self.terms))
        if not self.terms:
            raise ConfigurationError(f"{self.name}: no terms")
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"{self.name}: duplicate term labels {labels}")
        cores = [mf.b for _, mf in self.terms]
        if any(b2 <= b1 for b1, b2 in zip(cores, cores[1:])):
            raise ConfigurationError(f"{self.name}: terms must be ordered by core position")
        # Piecewise linear, so a gap in coverage shows up either at a
        # breakpoint or at the midpoint between two consecutive breakpoints.
        pts = sorted({0.0, 1.0, *(p for _, mf in self.terms for p in mf.breakpoints)})
        probes = np.array(pts + [(u + v) / 2 for u, v in zip(pts, pts[1:])])
        total = np.max([mf(probes) for _, mf in self.terms], axis=0)
        if np.any(total <= 0.0):
            bad = probes[total <= 0.0]
            raise ConfigurationError(f"{self.name}: terms do not cover [0, 1], e.g. x={bad[0]:g}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.terms)

    def __getitem__(self, label: str) -> Trapezoid:
        for t, mf in self.terms:
            if t == label:
                return mf
        raise KeyError(label)

    def core_center(self, label: str) -> float:
        mf = self[label]
        return (mf.b + mf.c) / 2


def fuzzify(var: LinguisticVariable, x: float) -> FuzzifiedValue:
    x = _check_unit(x, var.name)
    return {t: mf(x) for t, mf in var.terms}


@dataclass(frozen=True)
class Rule:
    qoc: str
    top: str
    toc: str

    def __str__(self):
        return f"{self.qoc} {self.top} -> {self.toc}"


@dataclass(frozen=True)
class RuleBase:
    rules: tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        seen = set()
        for r in self.rules:
            key = (r.qoc, r.top)
            if key in seen:
                raise ConfigurationError(f"duplicate rule for antecedent {key}")
            seen.add(key)

    def consequent(self, qoc_term: str, top_term: str) -> str:
        for r in self.rules:
            if r.qoc == qoc_term and r.top == top_term:
                return r.toc
        raise ConfigurationError(f"no rule for (QoC={qoc_term}, ToP={top_term})")

    def validate(self, qoc: LinguisticVariable, top: LinguisticVariable, toc: LinguisticVariable):
        """Require exactly one rule per antecedent pair, consequents from ``toc``."""
        for r in self.rules:
            if r.qoc not in qoc.labels or r.top not in top.labels:
                raise ConfigurationError(f"rule '{r}' uses an unknown antecedent term")
            if r.toc not in toc.labels:
                raise ConfigurationError(f"rule '{r}' uses an unknown consequent term")
        for q in qoc.labels:
            for t in top.labels:
                self.consequent(q, t)

    def to_text(self) -> str:
        return "".join(f"{r}\n" for r in self.rules)


def parse_rules(text: str | Iterable[str]) -> RuleBase:
    """Parse ``<qoc_term> <top_term> -> <toc_term>`` lines; ``#`` starts a comment."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    rules = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, sep, rhs = line.partition("->")
        ante = lhs.split()
        cons = rhs.split()
        if not sep or len(ante) != 2 or len(cons) != 1:
            raise ConfigurationError(f"rule line {lineno}: expected '<qoc> <top> -> <toc>', got {raw!r}")
        rules.append(Rule(ante[0], ante[1], cons[0]))
    return RuleBase(tuple(rules))


@dataclass(frozen=True)
class AggregatedOutput:
    """Output envelope: pointwise max of consequent sets clipped at their firing strengths."""

    clipped: tuple[tuple[Trapezoid, float], ...]

    @classmethod
    def of(cls, mf: Trapezoid, height: float = 1.0) -> "AggregatedOutput":
        return cls(((mf, float(height)),))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for mf, h in self.clipped:
            out = np.maximum(out, np.minimum(h, mf(x)))
        return out

    def is_zero(self) -> bool:
        return all(h <= 0.0 for _, h in self.clipped)


def infer(rb: RuleBase, fq: Mapping[str, float], fp: Mapping[str, float], out: LinguisticVariable) -> AggregatedOutput:
    strengths: dict[str, float] = {}
    for q, mq in fq.items():
        for t, mt in fp.items():
            w = min(mq, mt)
            if w <= 0.0:
                continue
            label = rb.consequent(q, t)
            strengths[label] = max(strengths.get(label, 0.0), w)
    return AggregatedOutput(tuple((out[label], strengths[label]) for label in out.labels if label in strengths))


def midpoints(resolution: int) -> np.ndarray:
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    return (np.arange(resolution) + 0.5) / resolution


def defuzzify_cog(agg: AggregatedOutput, resolution: int = DEFAULT_RESOLUTION) -> float:
    xs = midpoints(resolution)
    mu = agg(xs)
    area = mu.sum()
    if area <= 0.0:
        raise EmptyEnvelopeError("aggregated ToC envelope is identically zero")
    return float((xs * mu).sum() / area)


DEFAULT_RULES = """\
Low  Low  -> VL
Low  Med1 -> L
Low  Med2 -> L
Low  High -> M
Med1 Low  -> L
Med1 Med1 -> L
Med1 Med2 -> M
Med1 High -> M
Med2 Low  -> M
Med2 Med1 -> H
Med2 Med2 -> H
Med2 High -> H
High Low  -> H
High Med1 -> H
High Med2 -> VH
High High -> VH
"""

INPUT_TERMS = {
    "Low": (0.0, 0.0, 0.15, 0.35),
    "Med1": (0.15, 0.35, 0.40, 0.55),
    "Med2": (0.40, 0.55, 0.60, 0.80),
    "High": (0.60, 0.80, 1.0, 1.0),
}

OUTPUT_TERMS = {
    "VL": (0.0, 0.0, 0.10, 0.25),
    "L": (0.10, 0.25, 0.30, 0.45),
    "M": (0.30, 0.45, 0.55, 0.70),
    "H": (0.55, 0.70, 0.75, 0.90),
    "VH": (0.75, 0.90, 1.0, 1.0),
}


def make_variable(name: str, terms: Mapping[str, Sequence[float]]) -> LinguisticVariable:
    try:
        return LinguisticVariable(name, tuple((t, Trapezoid(*map(float, bp))) for t, bp in terms.items()))
    except TypeError as exc:
        raise ConfigurationError(f"{name}: each term needs four breakpoints ({exc})") from None


@dataclass(frozen=True)
class FuzzyEngine:
    """Immutable QoC/ToP -> ToC inference system.

    ``evaluate`` is the scalar pipeline; ``evaluate_many`` runs the same
    computation over arrays and is what the simulator uses.
    """

    qoc: LinguisticVariable
    top: LinguisticVariable
    toc: LinguisticVariable
    rules: RuleBase
    resolution: int = DEFAULT_RESOLUTION
    _xs: np.ndarray = field(init=False, repr=False, compare=False)
    _toc_mu: np.ndarray = field(init=False, repr=False, compare=False)
    _cons: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.rules.validate(self.qoc, self.top, self.toc)
        xs = midpoints(self.resolution)
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_toc_mu", np.array([mf(xs) for _, mf in self.toc.terms]))
        # _cons[i, j] = index of the ToC term for (QoC term i, ToP term j)
        cons = np.array(
            [[self.toc.labels.index(self.rules.consequent(q, t)) for t in self.top.labels] for q in self.qoc.labels]
        )
        object.__setattr__(self, "_cons", cons)

    @classmethod
    def default(cls, resolution: int = DEFAULT_RESOLUTION) -> "FuzzyEngine":
        return cls(
            make_variable("QoC", INPUT_TERMS),
            make_variable("ToP", INPUT_TERMS),
            make_variable("ToC", OUTPUT_TERMS),
            parse_rules(DEFAULT_RULES),
            resolution,
        )

    @classmethod
    def from_config(cls, cfg: Mapping | None) -> "FuzzyEngine":
        """Build from a mapping with optional keys ``qoc_terms``, ``top_terms``,
        ``toc_terms`` (label -> [a, b, c, d]), ``rules`` (rule-table text or a
        list of lines) and ``resolution``. Missing keys fall back to defaults."""
        cfg = dict(cfg or {})
        unknown = set(cfg) - {"qoc_terms", "top_terms", "toc_terms", "rules", "resolution"}
        if unknown:
            raise ConfigurationError(f"unknown fuzzy config keys: {sorted(unknown)}")
        return cls(
            make_variable("QoC", cfg.get("qoc_terms", INPUT_TERMS)),
            make_variable("ToP", cfg.get("top_terms", INPUT_TERMS)),
            make_variable("ToC", cfg.get("toc_terms", OUTPUT_TERMS)),
            parse_rules(cfg.get("rules", DEFAULT_RULES)),
            int(cfg.get("resolution", DEFAULT_RESOLUTION)),
        )

    def to_config(self) -> dict:
        def terms(var):
            return {t: list(mf.breakpoints) for t, mf in var.terms}

        return {
            "qoc_terms": terms(self.qoc),
            "top_terms": terms(self.top),
            "toc_terms": terms(self.toc),
            "rules": self.rules.to_text(),
            "resolution": self.resolution,
        }

    def aggregate(self, qoc: float, top: float) -> AggregatedOutput:
        return infer(self.rules, fuzzify(self.qoc, qoc), fuzzify(self.top, top), self.toc)

    def evaluate(self, qoc: float, top: float) -> float:
        _check_unit(qoc, "qoc")
        _check_unit(top, "top")
        return float(self.evaluate_many(np.array([qoc]), np.array([top]))[0])

    def evaluate_many(self, qoc, top) -> np.ndarray:
        q = np.atleast_1d(np.asarray(qoc, dtype=float))
        p = np.atleast_1d(np.asarray(top, dtype=float))
        if q.shape != p.shape:
            raise ValueError("qoc and top must have the same shape")
        if q.size and (q.min() < 0 or q.max() > 1 or p.min() < 0 or p.max() > 1):
            raise ValueError("qoc and top must lie in [0, 1]")
        mq = np.stack([mf(q) for _, mf in self.qoc.terms], axis=-1)  # (m, nq)
        mp = np.stack([mf(p) for _, mf in self.top.terms], axis=-1)  # (m, np)
        fire = np.minimum(mq[:, :, None], mp[:, None, :]).reshape(len(q), -1)
        cons = self._cons.reshape(-1)
        strength = np.zeros((len(q), len(self.toc.terms)))
        for k in range(strength.shape[1]):
            sel = cons == k
            if sel.any():
                strength[:, k] = fire[:, sel].max(axis=1)
        env = np.minimum(strength[:, :, None], self._toc_mu[None, :, :]).max(axis=1)  # (m, n)
        area = env.sum(axis=1)
        if np.any(area <= 0.0):
            raise EmptyEnvelopeError("aggregated ToC envelope is identically zero")
        # row-wise sums rather than a BLAS product: a row's result must not
        # depend on how many other rows share the batch
        return (env * self._xs).sum(axis=1) / area


_DEFAULT_ENGINE: FuzzyEngine | None = None


def default_engine() -> FuzzyEngine:
    global _DEFAULT_ENGINE
    if _DEFAULT_ENGINE is None:
        _DEFAULT_ENGINE = FuzzyEngine.default()
    return _DEFAULT_ENGINE


def evaluate_toc(qoc: float, top: float, engine: FuzzyEngine | None = None) -> float:
    return (engine or default_engine()).evaluate(qoc, top)
