"""Smoke runs of the randomized invariant suites (small trial counts; the
acceptance module runs them at full scale)."""

from setasp import checks


def test_persistence_and_negation_hold():
    checked, violations = checks.persistence_suite(trials=200, seed=0)
    assert checked == 200
    assert violations == []


def test_total_interpretations_collapse_worlds():
    checked, violations = checks.total_collapse_suite(trials=100, seed=1)
    assert violations == []


def test_closure_idempotent_and_monotone():
    checked, violations = checks.closure_suite(trials=100, seed=2)
    assert violations == []


def test_builtin_aggregates_match_their_defining_rules():
    checked, violations = checks.definitional_consistency_suite(lo=0, hi=3, max_card=3)
    assert violations == []


def test_sets_behave_like_opaque_constants():
    checked, violations = checks.conservativity_suite(trials=15, seed=3)
    assert violations == []


def test_existential_rewrites_preserve_models():
    checked, violations = checks.existential_suite(trials=5, seed=4)
    assert checked > 0
    assert violations == []


def test_run_suites_aggregates_results():
    outcome = checks.run_suites(["semantics", "collapse"], trials=50, seed=0)
    assert set(outcome) == {"semantics", "collapse"}
    for checked, violations in outcome.values():
        assert violations == []
