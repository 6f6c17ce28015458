import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sps_trust.errors import ConfigurationError, EmptyEnvelopeError
from sps_trust.fuzzy import (
    INPUT_TERMS,
    OUTPUT_TERMS,
    AggregatedOutput,
    FuzzyEngine,
    LinguisticVariable,
    Trapezoid,
    defuzzify_cog,
    evaluate_toc,
    fuzzify,
    infer,
    make_variable,
    membership_degree,
    parse_rules,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@pytest.fixture(scope="module")
def engine():
    return FuzzyEngine.default()


def quad_centroid(f, breakpoints=()):
    pts = sorted(set(breakpoints))
    num = quad(lambda x: x * f(x), 0, 1, points=pts or None, limit=200)[0]
    den = quad(f, 0, 1, points=pts or None, limit=200)[0]
    return num / den


# membership -------------------------------------------------------------


def test_membership_plateau_and_edge():
    mf = Trapezoid(0, 0, 0.2, 0.35)
    assert membership_degree(mf, 0.1) == 1.0
    assert membership_degree(mf, 0.35) == 0.0
    assert membership_degree(mf, 0.0) == 1.0


def test_membership_falling_edge_matches_high_precision():
    mf = Trapezoid(0, 0, 0.2, 0.35)
    with mpmath.workdps(50):
        expected = float((mpmath.mpf("0.35") - mpmath.mpf("0.275")) / (mpmath.mpf("0.35") - mpmath.mpf("0.2")))
    assert expected == pytest.approx(0.5, abs=1e-15)
    assert membership_degree(mf, 0.275) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("x", [-0.01, 1.01, float("nan")])
def test_membership_rejects_out_of_range(x):
    with pytest.raises(ValueError):
        membership_degree(Trapezoid(0, 0.1, 0.2, 0.3), x)


@pytest.mark.parametrize("bp", [(0.3, 0.2, 0.4, 0.5), (0, 0, 0.5, 1.2), (-0.1, 0, 0.1, 0.2)])
def test_trapezoid_rejects_bad_breakpoints(bp):
    with pytest.raises(ConfigurationError):
        Trapezoid(*bp)


@given(a=unit, b=unit, c=unit, d=unit, x=unit)
def test_membership_in_unit_interval(a, b, c, d, x):
    a, b, c, d = sorted((a, b, c, d))
    assert 0.0 <= membership_degree(Trapezoid(a, b, c, d), x) <= 1.0


# linguistic variables -----------------------------------------------------


def test_variable_rejects_coverage_gap():
    with pytest.raises(ConfigurationError, match="cover"):
        make_variable("X", {"lo": (0, 0, 0.2, 0.4), "hi": (0.5, 0.7, 1, 1)})


def test_variable_rejects_misordered_terms():
    with pytest.raises(ConfigurationError, match="ordered"):
        make_variable("X", {"hi": (0.5, 0.7, 1, 1), "lo": (0, 0, 0.5, 0.7)})


def test_fuzzify_core_and_left_boundary(engine):
    low_center = engine.qoc.core_center("Low")
    assert fuzzify(engine.qoc, low_center) == {"Low": 1.0, "Med1": 0.0, "Med2": 0.0, "High": 0.0}
    assert fuzzify(engine.qoc, 0.0) == {"Low": 1.0, "Med1": 0.0, "Med2": 0.0, "High": 0.0}


@pytest.mark.parametrize(
    "x,left,right",
    # crossovers solved from the linear edges: (d - x)/(d - c) = (x - a)/(b - a)
    [(0.25, "Low", "Med1"), (0.475, "Med1", "Med2"), (0.70, "Med2", "High")],
)
def test_fuzzify_crossovers(engine, x, left, right):
    deg = fuzzify(engine.qoc, x)
    assert deg[left] == pytest.approx(0.5, abs=1e-12)
    assert deg[right] == pytest.approx(0.5, abs=1e-12)


def test_fuzzify_rejects_out_of_range(engine):
    with pytest.raises(ValueError):
        fuzzify(engine.qoc, 1.5)


@pytest.mark.parametrize("terms", [INPUT_TERMS, OUTPUT_TERMS])
def test_default_partitions_sum_to_one(terms):
    var = make_variable("X", terms)
    xs = np.random.default_rng(7).random(10_000)
    total = sum(mf(xs) for _, mf in var.terms)
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


# rules --------------------------------------------------------------------


def test_default_rule_base_has_sixteen_rules(engine):
    assert len(engine.rules.rules) == 16
    assert engine.rules.consequent("Low", "Low") == "VL"
    assert engine.rules.consequent("High", "High") == "VH"
    assert engine.rules.consequent("High", "Low") == "H"


def test_parse_rules_errors():
    with pytest.raises(ConfigurationError):
        parse_rules("Low Low VL")
    with pytest.raises(ConfigurationError, match="duplicate"):
        parse_rules("Low Low -> VL\nLow Low -> L\n")


def test_incomplete_rule_base_rejected():
    text = "\n".join(line for line in FuzzyEngine.default().rules.to_text().splitlines() if not line.startswith("High High"))
    with pytest.raises(ConfigurationError, match="no rule"):
        FuzzyEngine.from_config({"rules": text})


def test_rules_round_trip_through_text(engine):
    assert parse_rules(engine.rules.to_text()) == engine.rules


# inference ----------------------------------------------------------------


def brute_force_envelope(engine, fq, fp, xs):
    env = np.zeros_like(xs)
    for q, t in itertools.product(engine.qoc.labels, engine.top.labels):
        w = min(fq.get(q, 0.0), fp.get(t, 0.0))
        mf = engine.toc[engine.rules.consequent(q, t)]
        env = np.maximum(env, np.minimum(w, mf(xs)))
    return env


def test_infer_single_rule_full_strength(engine):
    agg = infer(engine.rules, {"High": 1.0}, {"High": 1.0}, engine.toc)
    xs = np.linspace(0, 1, 2001)
    np.testing.assert_array_equal(agg(xs), engine.toc["VH"](xs))


def test_infer_nothing_fires(engine):
    zeros = dict.fromkeys(engine.qoc.labels, 0.0)
    agg = infer(engine.rules, zeros, zeros, engine.toc)
    assert agg.is_zero()
    assert np.all(agg(np.linspace(0, 1, 101)) == 0)
    with pytest.raises(EmptyEnvelopeError):
        defuzzify_cog(agg)


def test_infer_rules_12_and_16(engine):
    fq, fp = {"Med2": 0.6, "High": 0.4}, {"High": 1.0}
    agg = infer(engine.rules, fq, fp, engine.toc)
    xs = np.linspace(0, 1, 4001)
    expected = np.maximum(np.minimum(0.6, engine.toc["H"](xs)), np.minimum(0.4, engine.toc["VH"](xs)))
    np.testing.assert_array_equal(agg(xs), expected)


@settings(max_examples=200, deadline=None)
@given(q=unit, p=unit)
def test_infer_matches_brute_force(engine, q, p):
    fq, fp = fuzzify(engine.qoc, q), fuzzify(engine.top, p)
    xs = np.linspace(0, 1, 501)
    np.testing.assert_array_equal(infer(engine.rules, fq, fp, engine.toc)(xs), brute_force_envelope(engine, fq, fp, xs))


def test_infer_missing_rule_for_activated_pair(engine):
    partial = parse_rules("Low Low -> VL\n")
    with pytest.raises(ConfigurationError):
        infer(partial, {"Low": 1.0}, {"Med1": 0.5}, engine.toc)


# defuzzification ----------------------------------------------------------


def test_cog_symmetric_trapezoid():
    assert defuzzify_cog(AggregatedOutput.of(Trapezoid(0.2, 0.4, 0.6, 0.8))) == pytest.approx(0.5, abs=1e-6)


def test_cog_right_triangle():
    mf = Trapezoid(0, 0, 0, 0.4)
    oracle = quad_centroid(mf, mf.breakpoints)
    assert oracle == pytest.approx(0.4 / 3, abs=1e-10)
    assert defuzzify_cog(AggregatedOutput.of(mf)) == pytest.approx(0.4 / 3, abs=1e-4)


def test_cog_rule_12_16_envelope_converges(engine):
    agg = infer(engine.rules, {"Med2": 0.6, "High": 0.4}, {"High": 1.0}, engine.toc)
    coarse, fine = defuzzify_cog(agg, 1001), defuzzify_cog(agg, 10001)
    assert abs(coarse - fine) < 1e-4
    bps = [p for mf, _ in agg.clipped for p in mf.breakpoints] + [0.61, 0.64, 0.81, 0.84]
    assert fine == pytest.approx(quad_centroid(agg, bps), abs=1e-5)


def test_cog_resolution_floor():
    with pytest.raises(ValueError):
        defuzzify_cog(AggregatedOutput.of(Trapezoid(0, 0.5, 0.5, 1)), 100)


# full pipeline ------------------------------------------------------------


def test_toc_at_extreme_prototypes(engine):
    high = engine.qoc.core_center("High")
    low = engine.qoc.core_center("Low")
    vh = defuzzify_cog(AggregatedOutput.of(engine.toc["VH"]))
    vl = defuzzify_cog(AggregatedOutput.of(engine.toc["VL"]))
    assert evaluate_toc(high, high) == pytest.approx(vh, abs=1e-12)
    assert evaluate_toc(low, low) == pytest.approx(vl, abs=1e-12)
    grid = np.linspace(0, 1, 21)
    q, p = np.meshgrid(grid, grid)
    assert engine.evaluate_many(q.ravel(), p.ravel()).min() >= vl - 1e-12


def test_toc_dips_where_clipped_shoulder_shifts_centroid(engine):
    # Max-min with centroid defuzzification is not monotone in ToP at QoC = 1:
    # clipping the VH shoulder at 0.5 pulls its centroid left of the
    # unclipped H/VH mix at ToP = 0.6. The acceptance suite runs the full grid check.
    assert evaluate_toc(1.0, 0.7) < evaluate_toc(1.0, 0.6)
    assert evaluate_toc(0.5, 0.5) < evaluate_toc(0.5, 0.4)


def test_toc_monotone_along_core_diagonal(engine):
    cores = [engine.qoc.core_center(t) for t in engine.qoc.labels]
    diag = [evaluate_toc(c, c) for c in cores]
    assert all(a < b for a, b in zip(diag, diag[1:]))


def test_prototype_ordering_follows_rule_consequents(engine):
    rank = {label: i for i, label in enumerate(engine.toc.labels)}
    by_level = {}
    for q, p in itertools.product(engine.qoc.labels, engine.top.labels):
        toc = evaluate_toc(engine.qoc.core_center(q), engine.top.core_center(p))
        by_level.setdefault(rank[engine.rules.consequent(q, p)], []).append(toc)
    levels = sorted(by_level)
    for lo, hi in zip(levels, levels[1:]):
        assert max(by_level[lo]) < min(by_level[hi])


def test_scalar_and_batch_paths_agree(engine):
    rng = np.random.default_rng(3)
    q, p = rng.random(50), rng.random(50)
    batch = engine.evaluate_many(q, p)
    scalar = [defuzzify_cog(engine.aggregate(a, b)) for a, b in zip(q, p)]
    np.testing.assert_array_equal(batch, scalar)
    np.testing.assert_array_equal(engine.evaluate_many(q[:7], p[:7]), batch[:7])


@settings(max_examples=300, deadline=None)
@given(q=unit, p=unit)
def test_toc_strictly_inside_unit_interval(engine, q, p):
    toc = evaluate_toc(q, p)
    assert 0.0 < toc < 1.0
    assert toc == evaluate_toc(q, p)


def test_engine_rejects_out_of_range(engine):
    with pytest.raises(ValueError):
        engine.evaluate(1.2, 0.5)
    with pytest.raises(ValueError):
        engine.evaluate_many([0.1, -0.1], [0.5, 0.5])


def test_engine_config_round_trip():
    cfg = FuzzyEngine.default().to_config()
    assert FuzzyEngine.from_config(cfg) == FuzzyEngine.default()
    with pytest.raises(ConfigurationError, match="unknown"):
        FuzzyEngine.from_config({"defuzzifier": "mom"})


def test_variable_terms_lookup():
    var = LinguisticVariable("X", (("a", Trapezoid(0, 0, 0.5, 1)), ("b", Trapezoid(0, 0.5, 1, 1))))
    assert var["b"].b == 0.5
    with pytest.raises(KeyError):
        var["c"]
