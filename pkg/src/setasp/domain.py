"""Bounded ground universe and the active instantiation domain.

The mathematical universe is infinite (all Herbrand terms, all finite sets
of tuples over them, nested arbitrarily).  Solving works relative to
explicit :class:`DomainBounds`; results are exact only up to those bounds.

Quantifiers are instantiated over the *active domain*: base values that can
actually reach a variable (bounded integers and Herbrand terms, ground
values written in the program, declared function ranges), plus one or more
layers of finite sets over that base when some variable can be compared
against a set-valued term.  ``full_domain`` replaces this demand-driven
choice with the literal bounded universe at ``max_set_rank``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

from .errors import DomainLimitError
from .parser import Signature, Theory
from .syntax import (
    AGGREGATE_NAMES,
    ARITH_OPS,
    EApp,
    Eq,
    ExtSet,
    HApp,
    IntSet,
    Num,
    PredAtom,
    RELATION_PREDS,
    SET_OPS,
    Val,
    Var,
    walk,
)
from .values import EMPTY_SET, UNDEF, FinSet, HTerm, value_key


@dataclass(frozen=True)
class DomainBounds:
    """Size limits that finitize the universe.

    ``domain_cap``, ``atom_cap`` and ``instance_cap`` are hard guards: they
    abort construction instead of letting an enumeration explode.
    """

    max_herbrand_depth: int = 2
    int_min: int = 0
    int_max: int = 10
    max_set_rank: int = 1
    max_set_card: int = 4
    max_tuple_arity: int = 2
    full_domain: bool = False
    domain_cap: int = 50_000
    atom_cap: int = 18
    instance_cap: int = 200_000

    def __post_init__(self):
        # int_min > int_max is allowed and means "no integer values"
        for name in ("max_herbrand_depth", "max_set_rank", "max_set_card", "max_tuple_arity"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def with_(self, **kwargs):
        return replace(self, **kwargs)

    def clip_int(self, n):
        """Integers outside the configured range are not domain values."""
        if self.int_min <= n <= self.int_max:
            return n
        return UNDEF


def _herbrand_terms(sig: Signature, bounds: DomainBounds):
    """All constructor terms up to the depth bound, plus the integer range."""
    values = set(range(bounds.int_min, bounds.int_max + 1))
    constants = {HTerm(name) for name, arity in sig.constructors.items() if arity == 0}
    values |= constants
    builders = [(n, a) for n, a in sig.constructors.items() if a > 0]
    pool = set(constants)
    for depth in range(1, bounds.max_herbrand_depth + 1):
        fresh = set()
        for name, arity in builders:
            for args in itertools.product(sorted(pool, key=value_key), repeat=arity):
                if max((_herbrand_depth(a) for a in args), default=0) == depth - 1:
                    fresh.add(HTerm(name, args))
                    if len(values) + len(fresh) > bounds.domain_cap:
                        raise DomainLimitError(
                            "Herbrand universe exceeds the domain cap; lower "
                            "max_herbrand_depth or the constructor signature",
                            "domain_cap",
                        )
        pool |= fresh
        values |= fresh
        if not fresh:
            break
    return values


def _herbrand_depth(v):
    if isinstance(v, HTerm) and v.args:
        return 1 + max(_herbrand_depth(a) for a in v.args)
    return 0


def _set_layer(base, bounds: DomainBounds):
    """All finite sets of tuples over ``base`` within the card/arity bounds."""
    layer = {EMPTY_SET}
    base_sorted = sorted(base, key=value_key)
    n = len(base_sorted)
    for arity in range(1, bounds.max_tuple_arity + 1):
        tuple_count = n**arity
        expected = sum(
            math.comb(tuple_count, k) for k in range(1, min(bounds.max_set_card, tuple_count) + 1)
        )
        if expected > bounds.domain_cap:
            raise DomainLimitError(
                f"set layer over {n} values at arity {arity} has {expected} sets; "
                "lower max_set_card, max_tuple_arity or the base domain",
                "domain_cap",
            )
        tuples = sorted(itertools.product(base_sorted, repeat=arity), key=value_key)
        for card in range(1, min(bounds.max_set_card, len(tuples)) + 1):
            for combo in itertools.combinations(tuples, card):
                layer.add(FinSet(combo))
    return layer


def build_domain_level(sig: Signature, bounds: DomainBounds, i: int):
    """The bounded universe at stratum ``i``: sets of tuples added ``i`` times."""
    if i > bounds.max_set_rank:
        raise ValueError(f"level {i} exceeds max_set_rank={bounds.max_set_rank}")
    values = _herbrand_terms(sig, bounds)
    for _ in range(i):
        values = values | _set_layer(values, bounds)
        if len(values) > bounds.domain_cap:
            raise DomainLimitError("bounded universe exceeds the domain cap", "domain_cap")
    return frozenset(values)


# ---------------------------------------------------------------------------
# Active domain


def ground_constructor_value(term):
    """Value of a variable-free constructor term, or None."""
    if isinstance(term, Num):
        return term.value
    if isinstance(term, Val):
        return term.value
    if isinstance(term, HApp):
        args = [ground_constructor_value(a) for a in term.args]
        if any(a is None for a in args):
            return None
        return HTerm(term.name, args)
    if isinstance(term, ExtSet):
        rows = []
        for member in term.members:
            vals = [ground_constructor_value(t) for t in member]
            if any(v is None for v in vals):
                return None
            rows.append(tuple(vals))
        return FinSet(rows)
    return None


def _value_components(v, out):
    out.add(v)
    if isinstance(v, HTerm):
        for a in v.args:
            _value_components(a, out)
    elif isinstance(v, FinSet):
        for t in v.tuples:
            for e in t:
                _value_components(e, out)


def _term_sort(term, sig: Signature):
    """Coarse value sort: 'int', 'herb', 'set' or 'any'."""
    if isinstance(term, Num):
        return "int"
    if isinstance(term, Var):
        return "any"
    if isinstance(term, HApp):
        return "herb"
    if isinstance(term, (ExtSet, IntSet)):
        return "set"
    if isinstance(term, Val):
        return "set" if isinstance(term.value, FinSet) else (
            "int" if isinstance(term.value, int) else "herb"
        )
    if isinstance(term, EApp):
        if term.name in ARITH_OPS or term.name in AGGREGATE_NAMES:
            return "int"
        if term.name in SET_OPS:
            return "set"
        ranges = sig.func_ranges.get(term.name, ())
        return "set" if any(isinstance(v, FinSet) for v in ranges) else "herb"
    raise TypeError(f"not a term: {term!r}")


def needs_set_layer(theory: Theory):
    """True when some quantified variable can meet a set-valued term.

    Two triggers: an equality with a variable on one side and a set-sorted
    term on the other, and a predicate position fed both by a variable and
    by a set-sorted term.  Variables used purely as aggregate or membership
    arguments do not trigger the layer; use ``full_domain`` to quantify
    those over sets as well.
    """
    sig = theory.signature
    position_sorts = {}
    for phi in theory.formulas:
        for node in walk(phi):
            if isinstance(node, Eq):
                pairs = ((node.left, node.right), (node.right, node.left))
                for var_side, other in pairs:
                    if isinstance(var_side, Var) and _term_sort(other, sig) == "set":
                        return True
            elif isinstance(node, PredAtom) and node.pred not in RELATION_PREDS:
                for i, arg in enumerate(node.args):
                    sort = "var" if isinstance(arg, Var) else _term_sort(arg, sig)
                    position_sorts.setdefault((node.pred, i), set()).add(sort)
    return any({"var", "set"} <= sorts for sorts in position_sorts.values())


class ActiveDomain:
    """The finite instantiation domain: sorted values plus lookup set."""

    __slots__ = ("values", "value_set", "base", "has_set_layer")

    def __init__(self, values, base, has_set_layer):
        self.values = tuple(sorted(values, key=value_key))
        self.value_set = frozenset(values)
        self.base = frozenset(base)
        self.has_set_layer = has_set_layer

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, v):
        return v in self.value_set


def build_active_domain(theory: Theory, bounds: DomainBounds) -> ActiveDomain:
    """Base values plus, when needed, set layers over them.

    The base is the bounded integer/Herbrand universe, every ground
    constructor value written in the program, and the declared function
    ranges (with their component values).
    """
    base = set(_herbrand_terms(theory.signature, bounds))
    for phi in theory.formulas:
        for node in walk(phi):
            if isinstance(node, (Num, HApp, ExtSet, Val)):
                v = ground_constructor_value(node)
                if v is not None:
                    _value_components(v, base)
    for values in theory.signature.func_ranges.values():
        for v in values:
            _value_components(v, base)

    layered = set(base)
    if bounds.max_set_rank > 0 and (bounds.full_domain or needs_set_layer(theory)):
        for _ in range(bounds.max_set_rank):
            layered |= _set_layer(layered, bounds)
    if len(layered) > bounds.domain_cap:
        raise DomainLimitError("active domain exceeds the domain cap", "domain_cap")
    return ActiveDomain(layered, base, len(layered) > len(base))
