"""The aggregate-comparison fragment: classical satisfaction, the reduct,
subset-minimal stable models, and the differential harness against the
equilibrium engine.

The fragment allows predicate atoms over ground constructor terms plus
comparisons ``f{xs : body} <rel> n`` where ``f`` is an aggregate, the set
names a tuple of variables over a rank-0 body, and ``n`` is arithmetic.
Stable models are defined through a reduct: formulas not satisfied by the
candidate become falsum, satisfied set atoms become the conjunction of
their satisfied ground body instances, and the candidate must be the
unique subset-minimal classical model of what remains.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .domain import DomainBounds, ground_constructor_value
from .errors import NotGZError
from .interp import aggregate_eval, relation_eval
from .parser import Theory, parse_program
from .solver import (
    GroundTheory,
    atom_key,
    build_universe,
    find_stable_models,
    format_atom,
    ground_theory,
)
from .syntax import (
    AGGREGATE_NAMES,
    ARITH_OPS,
    BOT,
    RELATION_PREDS,
    TOP,
    And,
    EApp,
    Eq,
    Exists,
    ExtSet,
    Forall,
    HApp,
    Implies,
    IntSet,
    Num,
    Or,
    PredAtom,
    Val,
    Var,
    _Bot,
    _Quant,
    _Top,
    conj,
    formula_statement,
    free_vars,
    pretty,
    rank,
    walk,
)
from .values import UNDEF, FinSet, value_key

_GZ_RELS = frozenset({"<=", ">=", "<", ">", "!="})


# ---------------------------------------------------------------------------
# Fragment check


def _is_arith(term):
    if isinstance(term, (Num, Var)):
        return True
    if isinstance(term, Val):
        return isinstance(term.value, int)
    if isinstance(term, EApp) and term.name in ARITH_OPS:
        return all(_is_arith(a) for a in term.args)
    return False


def _is_set_name(term):
    """A set name varies exactly its bound variables: ``{xs : xs : body}``."""
    return (
        isinstance(term, IntSet)
        and len(term.head) == len(term.bound)
        and all(isinstance(t, Var) and t.name == b for t, b in zip(term.head, term.bound))
        and rank(term.body) == 0
        and not any(isinstance(n, _Quant) for n in walk(term.body))
    )


def _gz_pred_arg(term):
    if isinstance(term, Var):
        return True
    if isinstance(term, Num):
        return True
    if isinstance(term, Val):
        return not isinstance(term.value, FinSet)
    if isinstance(term, HApp):
        return not free_vars(term) and ground_constructor_value(term) is not None
    return False


def _gz_zero_formula(phi):
    """Quantifier-free rank-0 formula over fragment-shaped atoms."""
    if isinstance(phi, (_Bot, _Top)):
        return None
    if isinstance(phi, PredAtom):
        if phi.pred in RELATION_PREDS:
            for side in phi.args:
                if not (_is_arith(side) or _gz_pred_arg(side)):
                    return f"comparison over non-arithmetic term {pretty(side)!r}"
            return None
        for a in phi.args:
            if not _gz_pred_arg(a):
                return f"predicate argument {pretty(a)!r} is not a ground constructor term"
        return None
    if isinstance(phi, Eq):
        for side in (phi.left, phi.right):
            if not (_is_arith(side) or _gz_pred_arg(side)):
                return f"equality over {pretty(side)!r} is not a GZ atom"
        return None
    if isinstance(phi, (And, Or, Implies)):
        return _gz_zero_formula(phi.left) or _gz_zero_formula(phi.right)
    return f"construct {pretty(phi)!r} not allowed in a set body"


def _gz_atom(phi):
    """None when ``phi`` fits the fragment's atom grammar, else a reason."""
    if isinstance(phi, (_Bot, _Top)):
        return None
    if isinstance(phi, Eq) or (
        isinstance(phi, PredAtom) and phi.pred in _GZ_RELS and len(phi.args) == 2
    ):
        left, right = (phi.left, phi.right) if isinstance(phi, Eq) else phi.args
        if isinstance(left, EApp) and left.name in AGGREGATE_NAMES:
            inner = left.args[0]
            if not _is_set_name(inner):
                return f"aggregate argument {pretty(inner)!r} is not a set name"
            body_reason = _gz_zero_formula(inner.body)
            if body_reason:
                return body_reason
            # a non-arithmetic ground value on the right just makes the
            # atom false, so instantiated comparisons stay in the fragment
            if not (_is_arith(right) or _gz_pred_arg(right)):
                return f"aggregate compared against non-arithmetic term {pretty(right)!r}"
            return None
        if isinstance(right, EApp) and right.name in AGGREGATE_NAMES:
            return "aggregate must appear on the left of the comparison"
        for side in (left, right):
            if isinstance(side, IntSet):
                return (
                    f"equality with set name {pretty(side)!r} is not a GZ set atom"
                )
            if not (_is_arith(side) or _gz_pred_arg(side)):
                return f"term {pretty(side)!r} not allowed in a GZ atom"
        return None
    if isinstance(phi, PredAtom):
        for a in phi.args:
            if not _gz_pred_arg(a):
                return f"predicate argument {pretty(a)!r} is not a ground constructor term"
        return None
    return f"construct {formula_statement(phi)!r} is not a GZ formula"


def _gz_formula(phi):
    if isinstance(phi, (And, Or, Implies)):
        return _gz_formula(phi.left) or _gz_formula(phi.right)
    if isinstance(phi, (Forall, Exists)):
        return f"quantifier inside a GZ formula: {pretty(phi)!r}"
    return _gz_atom(phi)


def is_gz_theory(theory: Theory):
    """Whether every formula fits the fragment; returns ``(ok, diagnostic)``."""
    if theory.signature.func_ranges:
        return False, "declared evaluable functions are outside the GZ fragment"
    for phi in theory.formulas:
        matrix = phi
        while isinstance(matrix, Forall):
            matrix = matrix.body
        reason = _gz_formula(matrix)
        if reason:
            return False, reason
    return True, None


# ---------------------------------------------------------------------------
# Classical satisfaction and the reduct


def _static_args(atom):
    return tuple(ground_constructor_value(a) for a in atom.args)


def cl_satisfies(atoms, phi, universe) -> bool:
    """Classical single-world satisfaction of a ground GZ formula."""
    if isinstance(phi, _Bot):
        return False
    if isinstance(phi, _Top):
        return True
    if isinstance(phi, PredAtom):
        if phi.pred in _GZ_RELS:
            return _cl_comparison(atoms, phi.pred, phi.args[0], phi.args[1], universe)
        vals = _static_args(phi)
        return (phi.pred, vals) in atoms
    if isinstance(phi, Eq):
        return _cl_comparison(atoms, "=", phi.left, phi.right, universe)
    if isinstance(phi, And):
        return cl_satisfies(atoms, phi.left, universe) and cl_satisfies(atoms, phi.right, universe)
    if isinstance(phi, Or):
        return cl_satisfies(atoms, phi.left, universe) or cl_satisfies(atoms, phi.right, universe)
    if isinstance(phi, Implies):
        return (not cl_satisfies(atoms, phi.left, universe)) or cl_satisfies(
            atoms, phi.right, universe
        )
    raise NotGZError(f"not a ground GZ formula: {pretty(phi)!r}")


def _cl_comparison(atoms, rel, left, right, universe):
    if isinstance(left, EApp) and left.name in AGGREGATE_NAMES:
        k = _cl_aggregate(atoms, left, universe)
        if k is UNDEF:
            return False
        n = ground_constructor_value(right)
        if not isinstance(n, int):
            return False
        return k == n if rel == "=" else relation_eval(rel, k, n)
    lv = ground_constructor_value(left)
    rv = ground_constructor_value(right)
    if lv is None or rv is None:
        raise NotGZError(f"cannot evaluate comparison {pretty(left)} {rel} {pretty(right)}")
    if rel == "=":
        return lv == rv
    return relation_eval(rel, lv, rv)


def _cl_aggregate(atoms, agg, universe):
    """Aggregate value over the candidate tuples whose body holds in T."""
    iset = agg.args[0]
    members = []
    for head, body in universe.intset_candidates(iset):
        if cl_satisfies(atoms, body, universe):
            members.append(tuple(ground_constructor_value(t) for t in head))
    return aggregate_eval(agg.name, FinSet(members), universe.bounds)


def reduct(phi, atoms, universe):
    """The reduct of a ground GZ formula with respect to a candidate.

    Unsatisfied formulas become falsum; predicate atoms pass through;
    satisfied comparisons over fixed values become verum; a satisfied set
    atom becomes the conjunction of the reducts of its satisfied ground
    body instances; connectives recurse.
    """
    if not cl_satisfies(atoms, phi, universe):
        return BOT
    if isinstance(phi, _Top):
        return TOP
    if isinstance(phi, PredAtom):
        if phi.pred in _GZ_RELS:
            return _reduct_comparison(phi.args[0], atoms, universe)
        return phi
    if isinstance(phi, Eq):
        return _reduct_comparison(phi.left, atoms, universe)
    if isinstance(phi, (And, Or, Implies)):
        left = reduct(phi.left, atoms, universe)
        right = reduct(phi.right, atoms, universe)
        return _fold(type(phi)(left, right))
    raise NotGZError(f"not a ground GZ formula: {pretty(phi)!r}")


def _fold(phi):
    """Classical constant folding; keeps printed reducts free of verum."""
    left, right = phi.left, phi.right
    if isinstance(phi, And):
        if left == TOP:
            return right
        if right == TOP:
            return left
        if BOT in (left, right):
            return BOT
    elif isinstance(phi, Or):
        if TOP in (left, right):
            return TOP
        if left == BOT:
            return right
        if right == BOT:
            return left
    elif isinstance(phi, Implies):
        if left == BOT or right == TOP:
            return TOP
        if left == TOP:
            return right
    return phi


def _reduct_comparison(left, atoms, universe):
    if isinstance(left, EApp) and left.name in AGGREGATE_NAMES:
        iset = left.args[0]
        parts = []
        for head, body in universe.intset_candidates(iset):
            if cl_satisfies(atoms, body, universe):
                parts.append(reduct(body, atoms, universe))
        return conj(parts)
    return TOP  # satisfied comparison over fixed values


# ---------------------------------------------------------------------------
# Stable models via the reduct


def _gz_possible_interval(atoms, agg, universe):
    """Optimistic aggregate bounds over subsets of the viable satisfiers."""
    iset = agg.args[0]
    members = []
    for head, body in universe.intset_candidates(iset):
        if _gz_possibly(atoms, body, universe):
            members.append(tuple(ground_constructor_value(t) for t in head))
    if agg.name == "count":
        return 0, len(members)
    if agg.name == "sum":
        firsts = [m[0] for m in members if isinstance(m[0], int)]
        low = sum(v for v in firsts if v < 0)
        high = sum(v for v in firsts if v > 0)
        return low, high
    ints = [m[0] for m in members if len(m) == 1 and isinstance(m[0], int)]
    if not ints:
        return None
    return min(ints), max(ints)


def _gz_possibly(atoms, phi, universe) -> bool:
    """Classical satisfiability by some subset of the viable atoms."""
    if isinstance(phi, _Bot):
        return False
    if isinstance(phi, _Top):
        return True
    if isinstance(phi, PredAtom):
        if phi.pred in _GZ_RELS:
            return _gz_possible_comparison(atoms, phi.pred, phi.args[0], phi.args[1], universe)
        return (phi.pred, _static_args(phi)) in atoms
    if isinstance(phi, Eq):
        return _gz_possible_comparison(atoms, "=", phi.left, phi.right, universe)
    if isinstance(phi, And):
        return _gz_possibly(atoms, phi.left, universe) and _gz_possibly(atoms, phi.right, universe)
    if isinstance(phi, Or):
        return _gz_possibly(atoms, phi.left, universe) or _gz_possibly(atoms, phi.right, universe)
    if isinstance(phi, Implies):
        return True
    raise NotGZError(f"not a ground GZ formula: {pretty(phi)!r}")


def _gz_possible_comparison(atoms, rel, left, right, universe):
    if isinstance(left, EApp) and left.name in AGGREGATE_NAMES:
        interval = _gz_possible_interval(atoms, left, universe)
        if interval is None:
            return False
        low, high = interval
        bounds = universe.bounds
        low = max(low, bounds.int_min)
        high = min(high, bounds.int_max)
        n = ground_constructor_value(right)
        if not isinstance(n, int) or low > high:
            return False
        if rel == "=":
            return low <= n <= high
        if rel in ("<=", "<"):
            return relation_eval(rel, low, n)
        if rel in (">=", ">"):
            return relation_eval(rel, high, n)
        return not (low == high == n)  # "!=": some value differs unless pinned
    return _cl_comparison(atoms, rel, left, right, universe)


def _gz_relevant_atoms(ground: GroundTheory):
    """Head instances reachable from the facts, classical reading."""
    universe = ground.universe
    atoms = set(ground.facts)

    def heads(phi):
        if isinstance(phi, PredAtom) and phi.pred not in RELATION_PREDS:
            atoms.add((phi.pred, _static_args(phi)))
        elif isinstance(phi, (And, Or)):
            heads(phi.left)
            heads(phi.right)
        elif isinstance(phi, Implies):
            if _gz_possibly(atoms, phi.left, universe):
                heads(phi.right)

    while True:
        before = len(atoms)
        for phi in ground.formulas:
            heads(phi)
        if len(atoms) == before:
            return frozenset(atoms)


def gz_stable_models(theory: Theory, bounds: DomainBounds = None):
    """All stable models under the reduct semantics, canonically ordered."""
    ok, reason = is_gz_theory(theory)
    if not ok:
        raise NotGZError(reason)
    bounds = bounds or DomainBounds()
    universe = build_universe(theory, bounds)
    ground = ground_theory(theory, universe)
    return gz_solve_ground(ground)


def gz_solve_ground(ground: GroundTheory):
    universe = ground.universe
    if any(phi == BOT for phi in ground.formulas):
        return []
    atoms = sorted(_gz_relevant_atoms(ground), key=atom_key)
    if len(atoms) > universe.bounds.atom_cap:
        raise NotGZError(f"{len(atoms)} candidate atoms is too many to enumerate")
    index = {atom: i for i, atom in enumerate(atoms)}
    forced = 0
    for atom in ground.facts:
        forced |= 1 << index[atom]
    stable = []
    for mask in range(1 << len(atoms)):
        if mask & forced != forced:
            continue
        candidate = frozenset(atoms[i] for i in range(len(atoms)) if mask >> i & 1)
        if not all(cl_satisfies(candidate, phi, universe) for phi in ground.formulas):
            continue
        reduced = [reduct(phi, candidate, universe) for phi in ground.formulas]
        if _has_smaller_model(candidate, reduced, universe):
            continue
        stable.append(candidate)
    stable.sort(key=lambda m: tuple(sorted(atom_key(a) for a in m)))
    return stable


def _has_smaller_model(candidate, reduced, universe):
    """Exhaustive subset search below the candidate, smallest first."""
    members = sorted(candidate, key=atom_key)
    for size in range(len(members)):
        for combo in itertools.combinations(members, size):
            smaller = frozenset(combo)
            if all(cl_satisfies(smaller, phi, universe) for phi in reduced):
                return True
    return False


# ---------------------------------------------------------------------------
# Differential harness


@dataclass
class CrossCheckResult:
    gz_models: list
    eq_models: list
    agree: bool

    def to_json(self):
        return {
            "gzModels": [[format_atom(a) for a in sorted(m, key=atom_key)] for m in self.gz_models],
            "eqModels": [[format_atom(a) for a in sorted(m, key=atom_key)] for m in self.eq_models],
            "agree": self.agree,
        }


def cross_check(theory: Theory, bounds: DomainBounds = None) -> CrossCheckResult:
    """Run both engines on one theory and compare the stable-model sets."""
    ok, reason = is_gz_theory(theory)
    if not ok:
        raise NotGZError(reason)
    bounds = bounds or DomainBounds()
    gz_models = gz_stable_models(theory, bounds)
    eq_report = find_stable_models(theory, bounds)
    eq_models = eq_report.atom_sets()
    agree = set(gz_models) == set(eq_models)
    return CrossCheckResult(gz_models, eq_models, agree)


GENERATOR_BOUNDS = DomainBounds(int_min=0, int_max=3, max_herbrand_depth=0)


def random_gz_program(rng: random.Random) -> str:
    """One small random fragment program; shapes stay inside the grammar."""
    consts = sorted(rng.sample(["a", "b", "c"], rng.randint(1, 3)))
    preds = sorted(rng.sample(["p", "q", "r"], rng.randint(1, 3)))

    def const_or_int():
        return rng.choice(consts) if rng.random() < 0.6 else str(rng.randint(0, 3))

    def set_atom():
        agg = rng.choice(["count", "sum"])
        pred = rng.choice(preds)
        rel = rng.choice([">=", "=", "<="])
        n = rng.randint(0, 3)
        if rng.random() < 0.3:
            body = f"{pred}(V), V != {rng.choice(consts)}"
        else:
            body = f"{pred}(V)"
        return f"{agg}{{V : {body}}} {rel} {n}"

    def literal():
        roll = rng.random()
        if roll < 0.35:
            return f"{rng.choice(preds)}({const_or_int()})"
        if roll < 0.5:
            return f"not {rng.choice(preds)}({const_or_int()})"
        if roll < 0.85:
            return set_atom()
        return f"not {set_atom()}"

    lines = []
    for _ in range(rng.randint(1, 3)):
        lines.append(f"{rng.choice(preds)}({const_or_int()}).")
    for _ in range(rng.randint(0, 4)):
        body = ", ".join(literal() for _ in range(rng.randint(1, 2)))
        roll = rng.random()
        if roll < 0.15:
            lines.append(f":- {body}.")
        elif roll < 0.3:
            head_pred = rng.choice(preds)
            agg = rng.choice(["count", "sum"])
            src = rng.choice(preds)
            lines.append(f"{head_pred}(X) :- {agg}{{V : {src}(V)}} = X.")
        else:
            lines.append(f"{rng.choice(preds)}({const_or_int()}) :- {body}.")
    return "\n".join(lines)


def differential_trials(trials: int, seed: int, bounds: DomainBounds = None):
    """Generate programs and compare engines; returns a JSON-ready report."""
    bounds = bounds or GENERATOR_BOUNDS
    rng = random.Random(seed)
    agreements = 0
    disagreements = []
    for _ in range(trials):
        program = random_gz_program(rng)
        theory = parse_program(program)
        result = cross_check(theory, bounds)
        if result.agree:
            agreements += 1
        else:
            entry = {"program": program}
            entry.update(result.to_json())
            del entry["agree"]
            disagreements.append(entry)
    return {
        "trials": trials,
        "agreements": agreements,
        "disagreements": disagreements,
    }


# ---------------------------------------------------------------------------
# Existential variable introduction


def eligible_positions(theory: Theory):
    """Every argument position of every atom, set bodies included."""
    out = []
    for fi, phi in enumerate(theory.formulas):
        for oi, atom in enumerate(_atom_occurrences(phi)):
            arity = 2 if isinstance(atom, Eq) else len(atom.args)
            for ai in range(arity):
                out.append((fi, oi, ai))
    return out


def _atom_occurrences(phi):
    """Atoms in pre-order, an atom before the atoms nested in its args."""
    for node in walk(phi):
        if isinstance(node, (Eq, PredAtom)):
            yield node


class _AtomRewriter:
    """Replaces the ``oi``-th atom occurrence (same order as ``walk``)."""

    def __init__(self, oi, ai, fresh):
        self.oi = oi
        self.ai = ai
        self.fresh = fresh
        self.seen = -1
        self.done = False

    def formula(self, node):
        if self.done:
            return node
        if isinstance(node, (Eq, PredAtom)):
            self.seen += 1
            args = (node.left, node.right) if isinstance(node, Eq) else node.args
            if self.seen == self.oi:
                self.done = True
                if self.ai >= len(args):
                    raise IndexError("argument index out of range")
                target = args[self.ai]
                new_args = tuple(
                    Var(self.fresh) if i == self.ai else a for i, a in enumerate(args)
                )
                inner = (
                    Eq(new_args[0], new_args[1])
                    if isinstance(node, Eq)
                    else PredAtom(node.pred, new_args)
                )
                return Exists(self.fresh, And(Eq(Var(self.fresh), target), inner))
            new_args = tuple(self.term(a) for a in args)
            if all(a is b for a, b in zip(new_args, args)):
                return node
            if isinstance(node, Eq):
                return Eq(new_args[0], new_args[1])
            return PredAtom(node.pred, new_args)
        if isinstance(node, (_Bot, _Top)):
            return node
        if isinstance(node, (And, Or, Implies)):
            left = self.formula(node.left)
            right = self.formula(node.right)
            if left is node.left and right is node.right:
                return node
            return type(node)(left, right)
        if isinstance(node, _Quant):
            body = self.formula(node.body)
            return node if body is node.body else type(node)(node.var, body)
        raise TypeError(f"not a formula: {node!r}")

    def term(self, node):
        if self.done or isinstance(node, (Var, Num, Val)):
            return node
        if isinstance(node, (HApp, EApp)):
            args = tuple(self.term(a) for a in node.args)
            if all(a is b for a, b in zip(args, node.args)):
                return node
            return type(node)(node.name, args)
        if isinstance(node, ExtSet):
            members = tuple(tuple(self.term(t) for t in m) for m in node.members)
            if all(t is u for m, n in zip(members, node.members) for t, u in zip(m, n)):
                return node
            return ExtSet(members)
        if isinstance(node, IntSet):
            head = tuple(self.term(t) for t in node.head)
            body = self.formula(node.body)
            if body is node.body and all(t is u for t, u in zip(head, node.head)):
                return node
            return IntSet(node.bound, head, body)
        raise TypeError(f"not a term: {node!r}")


def existential_intro_transform(theory: Theory, selector) -> Theory:
    """Replace one atom argument by an existentially bound equal variable.

    ``p(..., tau, ...)`` turns into ``exists V (V = tau, p(..., V, ...))``;
    stable models are preserved.
    """
    fi, oi, ai = selector
    if fi >= len(theory.formulas):
        raise IndexError("formula index out of range")
    used = set()
    for phi in theory.formulas:
        for node in walk(phi):
            if isinstance(node, Var):
                used.add(node.name)
            elif isinstance(node, IntSet):
                used.update(node.bound)
            elif isinstance(node, _Quant):
                used.add(node.var)
    fresh = next(f"V{n}" for n in itertools.count() if f"V{n}" not in used)
    rewriter = _AtomRewriter(oi, ai, fresh)
    new_formula = rewriter.formula(theory.formulas[fi])
    if not rewriter.done:
        raise IndexError("atom occurrence index out of range")
    formulas = list(theory.formulas)
    formulas[fi] = new_formula
    return theory.replace_formulas(formulas)
