import random

import pytest

from setasp import DomainBounds, parse_program
from setasp.errors import NotGZError
from setasp.gz import (
    GENERATOR_BOUNDS,
    cl_satisfies,
    cross_check,
    differential_trials,
    gz_stable_models,
    is_gz_theory,
    random_gz_program,
    reduct,
)
from setasp.interp import H, T, Assignment, HTInterpretation
from setasp.solver import (
    atom_key,
    build_universe,
    ground_theory,
    relevant_atoms,
    satisfies,
)
from setasp.syntax import BOT, formula_statement
from setasp.parser import Theory
from setasp.values import HTerm

from conftest import COUNT0, P2, P4, atom

BOUNDS = DomainBounds(int_min=0, int_max=3, max_herbrand_depth=0)


def gz_ground(text, bounds=BOUNDS):
    theory = parse_program(text)
    universe = build_universe(theory, bounds)
    return ground_theory(theory, universe)


# ---------------------------------------------------------------------------
# fragment recognition


def test_p2_is_in_the_fragment(p2_theory):
    ok, reason = is_gz_theory(p2_theory)
    assert ok and reason is None


def test_aggregate_equality_with_variable_is_in_the_fragment():
    ok, reason = is_gz_theory(parse_program("q(Y) :- sum{X : p(X)} = Y. p(2)."))
    assert ok and reason is None


def test_program_one_is_rejected_with_a_set_name_diagnostic(p1_theory):
    ok, reason = is_gz_theory(p1_theory)
    assert not ok
    assert "set name" in reason


def test_nested_aggregate_is_rejected():
    theory = parse_program("p(a) :- count{X : count{Y : q(Y)} >= 1, p(X)} >= 1.")
    ok, reason = is_gz_theory(theory)
    assert not ok


def test_declared_functions_are_outside_the_fragment():
    theory = parse_program("#function f/0 : {a}. p(a) :- f = a.")
    ok, reason = is_gz_theory(theory)
    assert not ok


# ---------------------------------------------------------------------------
# classical satisfaction


def test_count_comparison_against_one_satisfier():
    ground = gz_ground(P2)
    body = ground.formulas[0].left
    assert cl_satisfies(frozenset([atom("p", "b")]), body, ground.universe)
    assert not cl_satisfies(frozenset(), body, ground.universe)


def test_count_of_nothing_still_reaches_zero():
    ground = gz_ground(COUNT0)
    body = ground.formulas[0].left
    assert cl_satisfies(frozenset(), body, ground.universe)


def test_membership_is_plain_lookup():
    ground = gz_ground(P2)
    assert cl_satisfies(frozenset([atom("p", "b")]), ground.formulas[1], ground.universe)
    p_a = ground.formulas[0].right
    assert not cl_satisfies(frozenset([atom("p", "b")]), p_a, ground.universe)


# ---------------------------------------------------------------------------
# the reduct


def both_atoms():
    return frozenset([atom("p", "a"), atom("p", "b")])


def test_reduct_of_the_circular_count_program():
    ground = gz_ground(P2)
    lines = sorted(
        formula_statement(reduct(phi, both_atoms(), ground.universe))
        for phi in ground.formulas
    )
    assert lines == ["p(a) :- p(a), p(b).", "p(b)."]


def test_reduct_of_the_guarded_count_program():
    ground = gz_ground(P4)
    lines = sorted(
        formula_statement(reduct(phi, both_atoms(), ground.universe))
        for phi in ground.formulas
    )
    assert lines == ["p(a) :- p(b).", "p(b)."]


def test_unsatisfied_formula_reduces_to_falsum():
    ground = gz_ground(P2)
    fact = ground.formulas[1]
    assert reduct(fact, frozenset(), ground.universe) == BOT


def test_reduct_preserves_satisfaction_by_the_candidate():
    rng = random.Random(5)
    for _ in range(30):
        ground = gz_ground(random_gz_program(rng), GENERATOR_BOUNDS)
        atoms = sorted(relevant_atoms(ground), key=atom_key)
        for mask in range(min(1 << len(atoms), 64)):
            candidate = frozenset(a for i, a in enumerate(atoms) if mask >> i & 1)
            whole = all(
                cl_satisfies(candidate, phi, ground.universe) for phi in ground.formulas
            )
            reduced = all(
                cl_satisfies(candidate, reduct(phi, candidate, ground.universe), ground.universe)
                for phi in ground.formulas
            )
            assert whole == reduced


# ---------------------------------------------------------------------------
# stable models via the reduct


def test_gz_stable_models_of_p2(p2_theory):
    assert gz_stable_models(p2_theory, BOUNDS) == []


def test_gz_stable_models_of_p4(p4_theory):
    assert gz_stable_models(p4_theory, BOUNDS) == [both_atoms()]


def test_gz_zero_threshold_has_no_stable_model():
    assert gz_stable_models(parse_program(COUNT0), BOUNDS) == []


def test_non_gz_theory_is_refused(p1_theory):
    with pytest.raises(NotGZError):
        gz_stable_models(p1_theory, BOUNDS)


def test_grounding_invariance():
    rng = random.Random(13)
    for _ in range(10):
        theory = parse_program(random_gz_program(rng))
        direct = gz_stable_models(theory, GENERATOR_BOUNDS)
        universe = build_universe(theory, GENERATOR_BOUNDS)
        ground = ground_theory(theory, universe)
        reground = Theory(theory.signature, ground.formulas, theory.source)
        assert gz_stable_models(reground, GENERATOR_BOUNDS) == direct


# ---------------------------------------------------------------------------
# bridges between the two semantics


def _candidate_space(ground, limit=64):
    atoms = sorted(relevant_atoms(ground), key=atom_key)
    for mask in range(min(1 << len(atoms), limit)):
        yield frozenset(a for i, a in enumerate(atoms) if mask >> i & 1)


def test_total_models_coincide_with_classical_models():
    rng = random.Random(21)
    for _ in range(20):
        ground = gz_ground(random_gz_program(rng), GENERATOR_BOUNDS)
        for candidate in _candidate_space(ground):
            total = HTInterpretation.total(ground.universe, Assignment(), candidate)
            for phi in ground.formulas:
                assert satisfies(total, T, phi) == cl_satisfies(
                    candidate, phi, ground.universe
                )


def test_here_world_matches_the_reduct():
    rng = random.Random(22)
    for _ in range(20):
        ground = gz_ground(random_gz_program(rng), GENERATOR_BOUNDS)
        for candidate in _candidate_space(ground, limit=32):
            smaller = sorted(candidate, key=atom_key)
            for k in range(len(smaller) + 1):
                here = frozenset(smaller[:k])
                interp = HTInterpretation(
                    ground.universe, Assignment(), Assignment(), here, candidate
                )
                for phi in ground.formulas:
                    assert satisfies(interp, H, phi) == cl_satisfies(
                        here, reduct(phi, candidate, ground.universe), ground.universe
                    )


def test_cross_check_agrees_on_the_named_programs():
    for text in (P2, P4, COUNT0):
        result = cross_check(parse_program(text), BOUNDS)
        assert result.agree


def test_differential_trials_report_shape():
    report = differential_trials(10, seed=3)
    assert report["trials"] == 10
    assert report["agreements"] == 10
    assert report["disagreements"] == []
