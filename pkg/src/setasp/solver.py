"""Grounding, model checking and equilibrium (stable-model) search.

The search enumerates total candidates ``(sigma, T)`` and keeps those with
no strictly smaller here-world model.  ``T`` ranges over subsets of the
*possibly-true* atoms: a fixpoint of ground-rule head instances whose
bodies are optimistically satisfiable.  An atom outside that fixpoint has
no support in any rule chain, so dropping it always yields a smaller model;
enumerating every atom of every predicate over the whole domain (the naive
alternative) is hopeless even at desk scale.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .domain import DomainBounds, build_active_domain
from .errors import DomainLimitError, RangeDeclarationError
from .interp import (
    H,
    T,
    Assignment,
    HTInterpretation,
    Universe,
    aggregate_eval,
    builtin_func_eval,
    eval_term,
    is_coherent,
    relation_eval,
    s_satisfies,
)
from .parser import Theory
from .syntax import (
    AGGREGATE_NAMES,
    BOT,
    BUILTIN_FUNCS,
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
    _Top,
    formula_statement,
    pretty,
    substitute,
    walk,
)
from .values import UNDEF, FinSet, HTerm, format_value, value_key


def atom_key(atom):
    pred, args = atom
    return (pred, tuple(value_key(a) for a in args))


def format_atom(atom):
    pred, args = atom
    if not args:
        return pred
    return f"{pred}({', '.join(format_value(a) for a in args)})"


@dataclass
class GroundTheory:
    universe: Universe
    formulas: tuple
    provenance: dict
    facts: frozenset = frozenset()

    def __iter__(self):
        return iter(self.formulas)


def build_universe(theory: Theory, bounds: DomainBounds) -> Universe:
    return Universe(theory.signature, bounds, build_active_domain(theory, bounds))


# ---------------------------------------------------------------------------
# Grounding


def ground_theory(theory: Theory, universe: Universe) -> GroundTheory:
    """Instantiate the universal closures over the active domain.

    Set-term bound variables are left alone (they are bound, not free) and
    inner quantifiers survive; satisfaction sweeps the domain for them.
    Instances decided by interpretation-independent parts alone are folded
    away, so e.g. a rule guarded by a false membership test vanishes.
    """
    formulas = []
    provenance = {}
    seen = set()
    static = HTInterpretation.total(universe, Assignment(), frozenset())
    for phi in theory.formulas:
        names = []
        matrix = phi
        while isinstance(matrix, Forall):
            names.append(matrix.var)
            matrix = matrix.body
        count = len(universe.domain) ** len(names)
        if count > universe.bounds.instance_cap:
            raise DomainLimitError(
                f"{count} instances for {formula_statement(phi)!r}", "instance_cap"
            )
        for combo in itertools.product(universe.domain.values, repeat=len(names)):
            sub = {n: Val(v) for n, v in zip(names, combo)}
            instance = substitute(matrix, sub)
            instance = simplify(instance, static)
            if instance is TOP or instance == TOP:
                continue
            if instance not in seen:
                seen.add(instance)
                formulas.append(instance)
                provenance[instance] = (phi, {n: v for n, v in zip(names, combo)})
                universe.register_intsets(instance)
    facts = set()
    for g in formulas:
        if isinstance(g, PredAtom) and g.pred not in RELATION_PREDS:
            vals = [eval_term(static, T, a) for a in g.args if _independent(a)]
            if len(vals) == len(g.args) and UNDEF not in vals:
                facts.add((g.pred, tuple(vals)))
    return GroundTheory(universe, tuple(formulas), provenance, frozenset(facts))


def _independent(term):
    """True when the term's value cannot depend on the interpretation."""
    for node in walk(term):
        if isinstance(node, (Var, IntSet)):
            return False
        if isinstance(node, EApp) and node.name not in BUILTIN_FUNCS and node.name not in AGGREGATE_NAMES:
            return False
    return True


def simplify(phi, static: HTInterpretation):
    """Fold interpretation-independent atoms and propagate constants.

    ``top -> phi`` may collapse to ``phi`` because satisfaction is only
    ever queried on coherent interpretations, where here-truth persists
    to there.
    """
    if isinstance(phi, PredAtom):
        if phi.pred in RELATION_PREDS and all(_independent(a) for a in phi.args):
            left = eval_term(static, T, phi.args[0])
            right = eval_term(static, T, phi.args[1])
            return TOP if relation_eval(phi.pred, left, right) else BOT
        return phi
    if isinstance(phi, Eq):
        if _independent(phi.left) and _independent(phi.right):
            left = eval_term(static, T, phi.left)
            right = eval_term(static, T, phi.right)
            return TOP if (left is not UNDEF and left == right) else BOT
        return phi
    if isinstance(phi, And):
        left = simplify(phi.left, static)
        right = simplify(phi.right, static)
        if left == BOT or right == BOT:
            return BOT
        if left == TOP:
            return right
        if right == TOP:
            return left
        if left is phi.left and right is phi.right:
            return phi
        return And(left, right)
    if isinstance(phi, Or):
        left = simplify(phi.left, static)
        right = simplify(phi.right, static)
        if left == TOP or right == TOP:
            return TOP
        if left == BOT:
            return right
        if right == BOT:
            return left
        if left is phi.left and right is phi.right:
            return phi
        return Or(left, right)
    if isinstance(phi, Implies):
        left = simplify(phi.left, static)
        right = simplify(phi.right, static)
        if left == BOT or right == TOP:
            return TOP
        if left == TOP:
            return right
        if left is phi.left and right is phi.right:
            return phi
        return Implies(left, right)
    if isinstance(phi, (Forall, Exists)):
        body = simplify(phi.body, static)
        if body == TOP or body == BOT:
            return body
        if body is phi.body:
            return phi
        return type(phi)(phi.var, body)
    return phi


# ---------------------------------------------------------------------------
# Possibly-true atoms

_TOP_MARK = object()

_VALUE_CAP = 128
_SUBSET_CAP = 12


class _Viability:
    """Optimistic fixpoint of derivable atoms over a ground theory.

    ``possible_values`` over-approximates a term's values across all
    candidate interpretations whose atoms stay inside the current fixpoint;
    ``possibly_sat`` over-approximates there-world satisfiability.  Heads
    whose antecedents are possibly satisfiable enter the fixpoint.
    """

    def __init__(self, ground: GroundTheory):
        self.ground = ground
        self.universe = ground.universe
        self.atoms = set(ground.facts)
        self._values = {}
        self._sat = {}

    def run(self):
        while True:
            self._values.clear()
            self._sat.clear()
            before = len(self.atoms)
            for phi in self.ground.formulas:
                self._collect_heads(phi)
            if len(self.atoms) == before:
                return frozenset(self.atoms)

    # -- possible values

    def possible_values(self, term):
        cached = self._values.get(term)
        if cached is not None:
            return cached
        self._values[term] = frozenset()  # cut accidental cycles conservatively
        out = self._possible_values(term)
        self._values[term] = out
        return out

    def _combos(self, terms):
        """Cartesian product of the argument possibility sets, capped."""
        sets = []
        for t in terms:
            vals = self.possible_values(t)
            if vals is _TOP_MARK:
                return _TOP_MARK
            sets.append(vals)
        total = 1
        for s in sets:
            total *= len(s)
            if total > _VALUE_CAP:
                return _TOP_MARK
        return list(itertools.product(*sets))

    def _possible_values(self, term):
        bounds = self.universe.bounds
        if isinstance(term, Val):
            return frozenset((term.value,))
        if isinstance(term, Num):
            return frozenset((term.value,))
        if isinstance(term, HApp):
            combos = self._combos(term.args)
            if combos is _TOP_MARK:
                return _TOP_MARK
            out = set()
            for combo in combos:
                if UNDEF in combo:
                    out.add(UNDEF)
                else:
                    out.add(HTerm(term.name, combo))
            return frozenset(out)
        if isinstance(term, EApp):
            name = term.name
            if name in self.universe.signature.func_ranges:
                return frozenset(self.universe.signature.func_ranges[name]) | {UNDEF}
            combos = self._combos(term.args)
            if combos is _TOP_MARK:
                return _TOP_MARK
            out = set()
            for combo in combos:
                if UNDEF in combo:
                    out.add(UNDEF)
                elif name in AGGREGATE_NAMES:
                    out.add(aggregate_eval(name, combo[0], bounds))
                else:
                    out.add(builtin_func_eval(name, combo, bounds))
            return frozenset(out)
        if isinstance(term, ExtSet):
            flat = [t for m in term.members for t in m]
            combos = self._combos(flat)
            if combos is _TOP_MARK:
                return _TOP_MARK
            arity = len(term.members[0]) if term.members else 0
            out = set()
            for combo in combos:
                if UNDEF in combo:
                    out.add(UNDEF)
                    continue
                rows = [
                    tuple(combo[i * arity + j] for j in range(arity))
                    for i in range(len(term.members))
                ]
                out.add(FinSet(rows))
            return frozenset(out)
        if isinstance(term, IntSet):
            return self._possible_extensions(term)
        raise TypeError(f"unexpected term {term!r}")

    def _possible_extensions(self, iset):
        tuples = set()
        has_undef = False
        for head, body in self.universe.intset_candidates(iset):
            if not self.possibly_sat(body):
                continue
            combos = self._combos(head)
            if combos is _TOP_MARK:
                return _TOP_MARK
            for combo in combos:
                if UNDEF in combo:
                    has_undef = True
                else:
                    tuples.add(combo)
            if len(tuples) > _SUBSET_CAP:
                return _TOP_MARK
        out = set()
        pool = sorted(tuples, key=value_key)
        for size in range(len(pool) + 1):
            for combo in itertools.combinations(pool, size):
                out.add(FinSet(combo))
        if has_undef:
            out.add(UNDEF)
        return frozenset(out)

    # -- optimistic satisfiability at the there-world

    def possibly_sat(self, phi):
        cached = self._sat.get(phi)
        if cached is not None:
            return cached
        self._sat[phi] = True
        out = self._possibly_sat(phi)
        self._sat[phi] = out
        return out

    def _possibly_sat(self, phi):
        if isinstance(phi, _Top):
            return True
        if isinstance(phi, _Bot):
            return False
        if isinstance(phi, PredAtom):
            combos = self._combos(phi.args)
            if combos is _TOP_MARK:
                return True
            if phi.pred in RELATION_PREDS:
                return any(
                    UNDEF not in combo and relation_eval(phi.pred, combo[0], combo[1])
                    for combo in combos
                )
            return any(
                UNDEF not in combo and (phi.pred, combo) in self.atoms for combo in combos
            )
        if isinstance(phi, Eq):
            left = self.possible_values(phi.left)
            right = self.possible_values(phi.right)
            if left is _TOP_MARK or right is _TOP_MARK:
                return True
            return any(v is not UNDEF for v in left & right)
        if isinstance(phi, And):
            return self.possibly_sat(phi.left) and self.possibly_sat(phi.right)
        if isinstance(phi, Or):
            return self.possibly_sat(phi.left) or self.possibly_sat(phi.right)
        if isinstance(phi, Implies):
            return True  # can always hold vacuously for some candidate
        if isinstance(phi, Forall):
            return all(self.possibly_sat(b) for b in self.universe.quantifier_instances(phi))
        if isinstance(phi, Exists):
            return any(self.possibly_sat(b) for b in self.universe.quantifier_instances(phi))
        raise TypeError(f"unexpected formula {phi!r}")

    # -- head collection

    def _collect_heads(self, phi):
        if isinstance(phi, PredAtom):
            if phi.pred in RELATION_PREDS:
                return
            combos = self._combos(phi.args)
            if combos is _TOP_MARK:
                arity = len(phi.args)
                if len(self.universe.domain) ** arity > 4096:
                    raise DomainLimitError(
                        f"cannot bound head instances of {pretty(phi)!r}", "atom_cap"
                    )
                combos = itertools.product(self.universe.domain.values, repeat=arity)
            for combo in combos:
                if UNDEF not in combo:
                    self.atoms.add((phi.pred, tuple(combo)))
        elif isinstance(phi, (And, Or)):
            self._collect_heads(phi.left)
            self._collect_heads(phi.right)
        elif isinstance(phi, Implies):
            if self.possibly_sat(phi.left):
                self._collect_heads(phi.right)
        elif isinstance(phi, (Forall, Exists)):
            for body in self.universe.quantifier_instances(phi):
                self._collect_heads(body)


def relevant_atoms(ground: GroundTheory):
    """Atoms that can occur in some stable model: the support fixpoint."""
    return _Viability(ground).run()


# ---------------------------------------------------------------------------
# Model checking


def satisfies(interp: HTInterpretation, w, phi) -> bool:
    """Two-world satisfaction; expects a coherence-closed interpretation."""
    return s_satisfies(interp, w, phi)


def models(interp: HTInterpretation, ground: GroundTheory) -> bool:
    """Coherence plus here-world satisfaction of every formula."""
    if not is_coherent(interp):
        return False
    return all(s_satisfies(interp, H, phi) for phi in ground.formulas)


# ---------------------------------------------------------------------------
# Stable-model search


@dataclass
class StableModel:
    atoms: frozenset
    sigma: Assignment

    def sorted_atoms(self):
        return sorted(self.atoms, key=atom_key)


@dataclass
class SearchStats:
    candidates: int = 0
    elapsed: float = 0.0


@dataclass
class StableModelReport:
    models: list
    stats: SearchStats = field(default_factory=SearchStats)

    def atom_sets(self):
        return [m.atoms for m in self.models]


def _declared_applications(ground: GroundTheory):
    """Declared-function applications whose values the theory can observe."""
    universe = ground.universe
    ranges = universe.signature.func_ranges
    if not ranges:
        return []
    apps = set()

    def scan(node):
        for sub in walk(node):
            if isinstance(sub, EApp) and sub.name in ranges:
                static_args = []
                for a in sub.args:
                    if _independent(a):
                        static = HTInterpretation.total(universe, Assignment(), frozenset())
                        v = eval_term(static, T, a)
                        static_args.append(v)
                    else:
                        static_args.append(None)
                if all(v is not None and v is not UNDEF for v in static_args):
                    apps.add((sub.name, tuple(static_args)))
                else:
                    # argument value varies: cover the whole domain
                    arity = len(sub.args)
                    if len(universe.domain) ** arity > universe.bounds.instance_cap:
                        raise DomainLimitError(
                            f"cannot enumerate applications of {sub.name}", "instance_cap"
                        )
                    for combo in itertools.product(universe.domain.values, repeat=arity):
                        apps.add((sub.name, combo))

    for phi in ground.formulas:
        scan(phi)
    for iset in list(universe.intsets):
        for head, body in universe.intset_candidates(iset):
            for t in head:
                scan(t)
            scan(body)
    return sorted(apps, key=lambda a: (a[0], tuple(value_key(v) for v in a[1])))


def _sigma_candidates(ground: GroundTheory):
    """Every total assignment of declared applications to range values."""
    apps = _declared_applications(ground)
    if not apps:
        return [Assignment()]
    ranges = ground.universe.signature.func_ranges
    choice_lists = []
    total = 1
    for name, args in apps:
        options = list(ranges[name]) + [UNDEF]
        choice_lists.append(options)
        total *= len(options)
        if total > ground.universe.bounds.instance_cap:
            raise DomainLimitError(
                f"{total} assignment candidates over {len(apps)} applications",
                "instance_cap",
            )
    out = []
    for combo in itertools.product(*choice_lists):
        funcs = {
            app: value for app, value in zip(apps, combo) if value is not UNDEF
        }
        out.append(Assignment(funcs))
    return out


def _sub_assignments(sigma: Assignment):
    """All assignments below ``sigma``: keep-or-drop each stored fact,
    largest first so the search tries the least change first."""
    items = sorted(sigma.funcs.items(), key=lambda kv: (kv[0][0], tuple(map(value_key, kv[0][1]))))
    n = len(items)
    for dropped in range(n + 1):
        for combo in itertools.combinations(range(n), dropped):
            keep = {
                key: value for i, (key, value) in enumerate(items) if i not in combo
            }
            yield Assignment(keep)


def find_countermodel(interp: HTInterpretation, ground: GroundTheory):
    """Search for a strictly smaller here-world model below a total model.

    Enumerates ``H`` by increasing cardinality (facts always stay in) and,
    for declared functions, every sub-assignment of the there-assignment;
    returns the first hit.
    """
    universe = ground.universe
    total_atoms = interp.atoms_t
    sigma_t = interp.sigma_t
    base_sigma = Assignment(sigma_t.funcs)
    forced = frozenset(a for a in ground.facts if a in total_atoms)
    free = sorted(total_atoms - forced, key=atom_key)
    sub_sigmas = list(_sub_assignments(base_sigma))
    for card in range(len(free) + 1):
        for combo in itertools.combinations(free, card):
            atoms_h = forced | set(combo)
            for sigma_h in sub_sigmas:
                if len(atoms_h) == len(total_atoms) and sigma_h == base_sigma:
                    continue  # not strictly smaller
                candidate = HTInterpretation(
                    universe, sigma_h, base_sigma, atoms_h, total_atoms, check=False
                )
                if all(s_satisfies(candidate, H, phi) for phi in ground.formulas):
                    return candidate
    return None


def check_equilibrium(interp: HTInterpretation, theory_or_ground):
    """Decide whether a total coherent model is in equilibrium.

    Returns ``(True, None)`` or ``(False, countermodel)``; also ``False``
    (with no countermodel) when the candidate is not a model at all.
    """
    ground = _as_ground(theory_or_ground, interp.universe)
    if not all(s_satisfies(interp, T, phi) for phi in ground.formulas):
        return False, None
    counter = find_countermodel(interp, ground)
    if counter is None:
        return True, None
    return False, counter


def _as_ground(theory_or_ground, universe):
    if isinstance(theory_or_ground, GroundTheory):
        return theory_or_ground
    return ground_theory(theory_or_ground, universe)


def _missing_ranges(theory: Theory):
    declared = set(theory.signature.func_ranges)
    missing = set()
    for name, arity in theory.signature.evaluables.items():
        if name not in AGGREGATE_NAMES and name not in declared:
            missing.add(name)
    return missing


def find_stable_models(theory: Theory, bounds: DomainBounds = None) -> StableModelReport:
    """Enumerate the stable models of a theory within the given bounds."""
    bounds = bounds or DomainBounds()
    missing = _missing_ranges(theory)
    if missing:
        raise RangeDeclarationError(
            f"no #function range declared for: {', '.join(sorted(missing))}"
        )
    universe = build_universe(theory, bounds)
    ground = ground_theory(theory, universe)
    return solve_ground(ground)


def solve_ground(ground: GroundTheory) -> StableModelReport:
    universe = ground.universe
    bounds = universe.bounds
    started = time.perf_counter()
    if any(phi == BOT for phi in ground.formulas):
        return StableModelReport([], SearchStats(0, time.perf_counter() - started))
    atoms = sorted(relevant_atoms(ground), key=atom_key)
    if len(atoms) > bounds.atom_cap:
        raise DomainLimitError(
            f"{len(atoms)} candidate atoms is too many to enumerate", "atom_cap"
        )
    forced_mask = 0
    index = {atom: i for i, atom in enumerate(atoms)}
    for atom in ground.facts:
        forced_mask |= 1 << index[atom]
    sigma_space = _sigma_candidates(ground)
    found = []
    stats = SearchStats()
    for mask in range(1 << len(atoms)):
        if mask & forced_mask != forced_mask:
            continue
        t_atoms = frozenset(atoms[i] for i in range(len(atoms)) if mask >> i & 1)
        for sigma_t in sigma_space:
            stats.candidates += 1
            candidate = HTInterpretation.total(universe, sigma_t, t_atoms)
            # total interpretations collapse both worlds, so the there-world
            # check decides modelhood
            if not all(s_satisfies(candidate, T, phi) for phi in ground.formulas):
                continue
            if find_countermodel(candidate, ground) is None:
                found.append(StableModel(t_atoms, _witness(candidate)))
                break
    found.sort(key=lambda m: tuple(atom_key(a) for a in m.sorted_atoms()))
    stats.elapsed = time.perf_counter() - started
    return StableModelReport(found, stats)


def _witness(interp: HTInterpretation) -> Assignment:
    """Materialize the derived set values into the reported assignment."""
    sets = {}
    for iset in interp.universe.intsets:
        value = eval_term(interp, T, iset)
        if value is not UNDEF:
            sets[iset] = value
    return Assignment(interp.sigma_t.funcs, sets)
