import pytest

from setasp.errors import ParseError, SignatureError
from setasp.parser import parse_program
from setasp.syntax import (
    EApp,
    HApp,
    Eq,
    Forall,
    Implies,
    IntSet,
    PredAtom,
    Var,
)
from setasp.values import EMPTY_SET, FinSet, HTerm


def test_single_fact():
    theory = parse_program("p(b).")
    assert theory.formulas == (PredAtom("p", (HApp("b"),)),)
    assert theory.signature.predicates == {"p": 1}
    assert theory.signature.constructors == {"b": 0}


def test_count_rule_ast_shape():
    theory = parse_program("p(a) :- count{X : p(X)} >= 1.")
    (phi,) = theory.formulas
    assert isinstance(phi, Implies)
    comparison = phi.left
    assert isinstance(comparison, PredAtom) and comparison.pred == ">="
    agg = comparison.args[0]
    assert isinstance(agg, EApp) and agg.name == "count"
    inner = agg.args[0]
    assert inner == IntSet(("X",), (Var("X"),), PredAtom("p", (Var("X"),)))


def test_implicit_closure_binds_outer_variable():
    theory = parse_program("q(Y) :- Y = {X : q(X)}.")
    (phi,) = theory.formulas
    assert isinstance(phi, Forall) and phi.var == "Y"
    matrix = phi.body
    assert isinstance(matrix, Implies)
    assert matrix.left == Eq(
        Var("Y"), IntSet(("X",), (Var("X"),), PredAtom("q", (Var("X"),)))
    )
    assert matrix.right == PredAtom("q", (Var("Y"),))


def test_explicit_bound_form_is_normalized():
    one_colon = parse_program("p(S) :- S = {X : q(X)}.")
    two_colon = parse_program("p(S) :- S = {X : X : q(X)}.")
    assert one_colon.formulas == two_colon.formulas


def test_function_directive():
    theory = parse_program("#function f/1 : {a; b; {1; 2}}.\nd(X) :- f(X) = a.")
    assert theory.signature.func_ranges["f"] == (
        HTerm("a"),
        HTerm("b"),
        FinSet([(1,), (2,)]),
    )
    assert theory.signature.evaluables["f"] == 1


def test_empty_extensional_set():
    theory = parse_program("p({}).")
    (phi,) = theory.formulas
    assert phi.args[0].members == ()


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_program("p(a)\nq(b).")
    assert err.value.line == 2


def test_arity_mismatch_rejected():
    with pytest.raises(SignatureError):
        parse_program("p(a). p(a, b).")


def test_symbol_cannot_be_predicate_and_constructor():
    with pytest.raises(SignatureError):
        parse_program("p(a). q(p).")


def test_duplicate_bound_variable_rejected():
    with pytest.raises(ParseError):
        parse_program("p(S) :- S = {X, X : (X, X) : q(X)}.")


def test_unused_bound_variable_rejected():
    with pytest.raises(ParseError):
        parse_program("p(S) :- S = {X, Y : X : q(X)}.")


def test_assignment_to_constructor_rejected():
    with pytest.raises(SignatureError):
        parse_program("g(a) := 1.")


def test_aggregate_arity_enforced():
    with pytest.raises(ParseError):
        parse_program("p(a) :- count(X, Y) >= 1.")


def test_aggregates_cannot_be_redeclared():
    with pytest.raises(ParseError):
        parse_program("#function count/1 : {1}.")


def test_comments_and_whitespace():
    theory = parse_program("% a comment\np(a).  % trailing\n\n% done\n")
    assert len(theory.formulas) == 1
