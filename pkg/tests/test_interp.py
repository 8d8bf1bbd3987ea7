import pytest

from setasp import DomainBounds, parse_program
from setasp.interp import (
    H,
    T,
    Assignment,
    HTInterpretation,
    aggregate_eval,
    assignment_leq,
    builtin_eval,
    coherence_closure,
    eval_term,
    ext,
    interp_agrees,
    interp_leq,
    is_coherent,
)
from setasp.solver import build_universe, ground_theory
from setasp.syntax import EApp, ExtSet, IntSet, Num, PredAtom, Val, Var
from setasp.values import EMPTY_SET, UNDEF, FinSet, HTerm, finset

from conftest import P1, atom

A, B, C, D = HTerm("a"), HTerm("b"), HTerm("c"), HTerm("d")


def universe_for(text, **bound_args):
    theory = parse_program(text)
    defaults = dict(int_min=0, int_max=10, max_herbrand_depth=0)
    defaults.update(bound_args)
    return build_universe(theory, DomainBounds(**defaults))


@pytest.fixture
def fn_universe():
    return universe_for(
        """
        #function f/1 : {a; c}.
        #function g/1 : {d}.
        #function h/1 : {d}.
        dom(a). dom(b). dom(c). dom(d).
        """,
        int_min=1,
        int_max=0,
    )


# ---------------------------------------------------------------------------
# term evaluation


def test_functions_compose_through_values(fn_universe):
    sigma = Assignment({("f", (A,)): C, ("g", (C,)): D})
    interp = HTInterpretation.total(fn_universe, sigma, frozenset())
    nested = EApp("g", (EApp("f", (Val(A),)),))
    assert eval_term(interp, T, nested) == D
    assert eval_term(interp, T, nested) == eval_term(interp, T, EApp("g", (Val(C),)))


def test_missing_fact_means_undefined_and_strictness_propagates(fn_universe):
    sigma = Assignment({("f", (A,)): C})
    interp = HTInterpretation.total(fn_universe, sigma, frozenset())
    assert eval_term(interp, T, EApp("f", (Val(B),))) is UNDEF
    assert eval_term(interp, T, EApp("h", (EApp("f", (Val(B),)),))) is UNDEF


def test_extensional_set_with_undefined_member_is_undefined():
    universe = universe_for("p(0). p(1). p(2). #function n/0 : {10}.")
    interp = HTInterpretation.total(
        universe, Assignment({("n", ()): 10}), frozenset()
    )

    def member(k):
        return (EApp("/", (EApp("*", (Num(k), EApp("n", ()))), Num(k))),)

    term = ExtSet([member(0), member(1), member(2)])
    assert eval_term(interp, T, term) is UNDEF


# ---------------------------------------------------------------------------
# extensions of intensional sets


P_SET = IntSet(("X",), (Var("X"),), PredAtom("p", (Var("X"),)))
DIV_SET = IntSet(
    ("X",),
    (EApp("/", (EApp("*", (Var("X"), EApp("n", ()))), Var("X"))),),
    PredAtom("p", (Var("X"),)),
)


def p_interp(universe, t_values, h_values=None, n=10):
    atoms_t = frozenset(atom("p", v) for v in t_values)
    atoms_h = atoms_t if h_values is None else frozenset(atom("p", v) for v in h_values)
    sigma = Assignment({("n", ()): n})
    return HTInterpretation(universe, sigma, sigma, atoms_h, atoms_t)


def test_extension_collects_satisfier_values():
    universe = universe_for("p(0). p(1). p(2). #function n/0 : {10}.")
    interp = p_interp(universe, [0, 1, 2])
    assert ext(interp, T, P_SET) == finset([0, 1, 2])


def test_extension_with_undefined_member_collapses():
    universe = universe_for("p(0). p(1). p(2). #function n/0 : {10}.")
    interp = p_interp(universe, [0, 1, 2])
    assert ext(interp, T, DIV_SET) is UNDEF  # 0*10/0 has no value


def test_here_extension_diverging_from_there_is_undefined():
    universe = universe_for("p(0). p(1). p(2). #function n/0 : {10}.")
    interp = p_interp(universe, [0, 1, 2], h_values=[0, 2])
    assert ext(interp, H, P_SET) == finset([0, 2])
    assert ext(interp, T, P_SET) == finset([0, 1, 2])
    assert eval_term(interp, H, P_SET) is UNDEF
    assert eval_term(interp, T, P_SET) == finset([0, 1, 2])


# ---------------------------------------------------------------------------
# orderings


def test_empty_assignment_is_least():
    assert assignment_leq(Assignment(), Assignment({("f", (A,)): C}))


def test_sub_assignment_is_below():
    small = Assignment({("f", (A,)): C})
    large = Assignment({("f", (A,)): C, ("f", (B,)): D})
    assert assignment_leq(small, large)
    assert not assignment_leq(large, small)


def test_conflicting_assignments_are_incomparable():
    left = Assignment({("f", (A,)): C})
    right = Assignment({("f", (A,)): D})
    assert not assignment_leq(left, right)


def test_interp_leq_is_reflexive():
    universe = universe_for("p(a).", int_min=1, int_max=0)
    interp = HTInterpretation.total(universe, Assignment(), frozenset([atom("p", "a")]))
    assert interp_leq(interp, interp)


def test_interp_leq_requires_equal_there_worlds():
    universe = universe_for("p(a). p(b) :- p(a).", int_min=1, int_max=0)
    small = HTInterpretation.total(universe, Assignment(), frozenset([atom("p", "a")]))
    large = HTInterpretation.total(
        universe, Assignment(), frozenset([atom("p", "a"), atom("p", "b")])
    )
    assert not interp_leq(small, large)
    assert not interp_leq(large, small)


def test_strictly_smaller_here_world():
    theory = parse_program(P1)
    universe = build_universe(theory, DomainBounds(int_min=1, int_max=2, max_herbrand_depth=0))
    ground_theory(theory, universe)  # registers the set terms
    i2_atoms = frozenset(
        [atom("q", 1), atom("q", 2), atom("p", finset([1, 2])), atom("r", 1), atom("r", 2)]
    )
    total = HTInterpretation.total(universe, Assignment(), i2_atoms)
    smaller = HTInterpretation(
        universe,
        Assignment(),
        Assignment(),
        i2_atoms - {atom("q", 2), atom("p", finset([1, 2]))},
        i2_atoms,
    )
    assert interp_leq(smaller, total)
    assert not interp_leq(total, smaller)


# ---------------------------------------------------------------------------
# coherence


def test_closure_derives_the_set_values_of_program_one():
    theory = parse_program(P1)
    universe = build_universe(theory, DomainBounds(int_min=1, int_max=2, max_herbrand_depth=0))
    ground_theory(theory, universe)
    i1_atoms = frozenset([atom("q", 1), atom("p", finset([1])), atom("r", 1), atom("r", 2)])
    closed = coherence_closure(HTInterpretation.total(universe, Assignment(), i1_atoms))
    r_set = IntSet(("X",), (Var("X"),), PredAtom("r", (Var("X"),)))
    q_set = IntSet(("X",), (Var("X"),), PredAtom("q", (Var("X"),)))
    assert closed.sigma_t.sets[r_set] == finset([1, 2])
    assert closed.sigma_t.sets[q_set] == finset([1])
    assert is_coherent(closed)


def test_closure_leaves_diverging_here_set_undefined():
    theory = parse_program(P1)
    universe = build_universe(theory, DomainBounds(int_min=1, int_max=2, max_herbrand_depth=0))
    ground_theory(theory, universe)
    i2_atoms = frozenset(
        [atom("q", 1), atom("q", 2), atom("p", finset([1, 2])), atom("r", 1), atom("r", 2)]
    )
    smaller = HTInterpretation(
        universe,
        Assignment(),
        Assignment(),
        i2_atoms - {atom("q", 2), atom("p", finset([1, 2]))},
        i2_atoms,
    )
    closed = coherence_closure(smaller)
    q_set = IntSet(("X",), (Var("X"),), PredAtom("q", (Var("X"),)))
    r_set = IntSet(("X",), (Var("X"),), PredAtom("r", (Var("X"),)))
    assert q_set not in closed.sigma_h.sets  # undefined values are absent
    assert closed.sigma_t.sets[q_set] == finset([1, 2])
    assert closed.sigma_h.sets[r_set] == finset([1, 2])


def test_count_of_derived_singleton():
    universe = universe_for("p(b).", int_min=0, int_max=3)
    interp = HTInterpretation.total(universe, Assignment(), frozenset([atom("p", "b")]))
    assert eval_term(interp, T, P_SET) == finset([B])
    assert eval_term(interp, T, EApp("count", (P_SET,))) == 1


def test_wrong_preset_value_is_not_coherent():
    universe = universe_for("p(b).", int_min=0, int_max=3)
    wrong = HTInterpretation.total(
        universe,
        Assignment(sets={P_SET: finset([A])}),
        frozenset([atom("p", "b")]),
    )
    universe.register_intsets(P_SET)
    assert not is_coherent(wrong)
    fixed = coherence_closure(wrong)
    assert is_coherent(fixed)
    assert interp_agrees(coherence_closure(fixed), fixed)


def test_aggregates_cannot_be_preset():
    with pytest.raises(ValueError):
        Assignment({("count", (EMPTY_SET,)): 0})


# ---------------------------------------------------------------------------
# aggregate and builtin tables


def test_sum_of_pairs():
    assert aggregate_eval("sum", finset([2, 3]), DomainBounds()) == 5


def test_max_min_of_empty_set_are_undefined():
    assert aggregate_eval("max", EMPTY_SET, DomainBounds()) is UNDEF
    assert aggregate_eval("min", EMPTY_SET, DomainBounds()) is UNDEF


def test_count_of_empty_set_is_zero():
    assert aggregate_eval("count", EMPTY_SET, DomainBounds()) == 0


def test_sum_keys_on_first_components():
    pairs = FinSet([(2, A), (3, B)])
    assert aggregate_eval("sum", pairs, DomainBounds()) == 5
    assert aggregate_eval("sum", finset([A]), DomainBounds()) is UNDEF


def test_aggregate_of_non_set_is_undefined():
    assert aggregate_eval("count", 3, DomainBounds()) is UNDEF


def test_division_by_zero_is_undefined():
    assert builtin_eval("/", [3, 0], DomainBounds()) is UNDEF


def test_division_must_be_exact():
    assert builtin_eval("/", [7, 2], DomainBounds()) is UNDEF
    assert builtin_eval("/", [10, 2], DomainBounds()) == 5


def test_set_difference():
    assert builtin_eval("\\", [finset([2, 3]), finset([3])], DomainBounds()) == finset([2])


def test_membership():
    assert builtin_eval("in", [2, finset([2, 3])]) is True
    assert builtin_eval("in", [4, finset([2, 3])]) is False
    assert builtin_eval("in", [2, EMPTY_SET]) is False


def test_arithmetic_clips_to_the_integer_range():
    bounds = DomainBounds(int_min=0, int_max=6)
    assert builtin_eval("+", [3, 3], bounds) == 6
    assert builtin_eval("+", [4, 3], bounds) is UNDEF
    assert aggregate_eval("sum", finset([5, 6]), bounds) is UNDEF


def test_disequality_on_constants_and_sets():
    assert builtin_eval("!=", [A, B]) is True
    assert builtin_eval("!=", [A, A]) is False
    assert builtin_eval("!=", [finset([1]), finset([2])]) is True
    assert builtin_eval("!=", [UNDEF, A]) is False


def test_order_comparisons_are_integer_only():
    assert builtin_eval("<=", [1, 2]) is True
    assert builtin_eval("<", [A, B]) is False
    assert builtin_eval(">", [finset([3]), 1]) is False
