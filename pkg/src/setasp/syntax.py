"""Term and formula ASTs, ranks, variable binding and pretty-printing.

Terms and formulas are stratified: a set term ``{xs : taus : phi}`` may only
carry a body of strictly smaller rank, so evaluation of a set's body never
sees the set itself.  Negation is not a connective of its own: ``not phi``
is stored as ``phi -> #false``.
"""

from __future__ import annotations

from .values import format_value

AGGREGATE_NAMES = frozenset({"count", "sum", "max", "min"})
ARITH_OPS = frozenset({"+", "-", "*", "/"})
SET_OPS = frozenset({"\\/", "/\\", "\\"})
BUILTIN_FUNCS = ARITH_OPS | SET_OPS
RELATION_PREDS = frozenset({"<=", ">=", "<", ">", "!=", "in"})
RESERVED_WORDS = frozenset({"not", "in", "exists", "forall"}) | AGGREGATE_NAMES


class _Node:
    __slots__ = ("_hash",)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return pretty(self)


# ---------------------------------------------------------------------------
# Terms


class Term(_Node):
    __slots__ = ()


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name
        self._hash = hash(("var", name))

    def __eq__(self, other):
        return self is other or (isinstance(other, Var) and self.name == other.name)

    __hash__ = _Node.__hash__


class Num(Term):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value
        self._hash = hash(("num", value))

    def __eq__(self, other):
        return self is other or (isinstance(other, Num) and self.value == other.value)

    __hash__ = _Node.__hash__


class Val(Term):
    """A ground domain value injected by instantiation."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value
        self._hash = hash(("val", value))

    def __eq__(self, other):
        return self is other or (isinstance(other, Val) and self.value == other.value)

    __hash__ = _Node.__hash__


class HApp(Term):
    """Application of a Herbrand constructor (constants have no args)."""

    __slots__ = ("name", "args")

    def __init__(self, name, args=()):
        self.name = name
        self.args = tuple(args)
        self._hash = hash(("happ", name, self.args))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, HApp) and self.name == other.name and self.args == other.args
        )

    __hash__ = _Node.__hash__


class EApp(Term):
    """Application of an evaluable function: declared, aggregate or builtin."""

    __slots__ = ("name", "args")

    def __init__(self, name, args=()):
        self.name = name
        self.args = tuple(args)
        self._hash = hash(("eapp", name, self.args))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, EApp) and self.name == other.name and self.args == other.args
        )

    __hash__ = _Node.__hash__


class ExtSet(Term):
    """Extensional set literal: a listed collection of same-arity term tuples."""

    __slots__ = ("members",)

    def __init__(self, members=()):
        members = tuple(tuple(m) for m in members)
        arities = {len(m) for m in members}
        if len(arities) > 1:
            raise ValueError("extensional set members must share one arity")
        if arities and 0 in arities:
            raise ValueError("empty tuple in extensional set")
        self.members = members
        self._hash = hash(("extset", members))

    def __eq__(self, other):
        return self is other or (isinstance(other, ExtSet) and self.members == other.members)

    __hash__ = _Node.__hash__


class IntSet(Term):
    """Intensional set ``{bound : head : body}``.

    ``bound`` is the tuple of variables being varied; every bound variable
    occurs in the head tuple or the body.  The body has strictly smaller
    rank than the set itself.
    """

    __slots__ = ("bound", "head", "body")

    def __init__(self, bound, head, body):
        self.bound = tuple(bound)
        if len(set(self.bound)) != len(self.bound):
            raise ValueError("duplicate bound variable in intensional set")
        self.head = tuple(head)
        if not self.head:
            raise ValueError("intensional set needs a nonempty head tuple")
        self.body = body
        self._hash = hash(("intset", self.bound, self.head, body))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, IntSet)
            and self.bound == other.bound
            and self.head == other.head
            and self.body == other.body
        )

    __hash__ = _Node.__hash__


# ---------------------------------------------------------------------------
# Formulas


class Formula(_Node):
    __slots__ = ()


class _Bot(Formula):
    __slots__ = ()

    def __init__(self):
        self._hash = hash("bot")

    def __eq__(self, other):
        return isinstance(other, _Bot)

    __hash__ = _Node.__hash__


class _Top(Formula):
    __slots__ = ()

    def __init__(self):
        self._hash = hash("top")

    def __eq__(self, other):
        return isinstance(other, _Top)

    __hash__ = _Node.__hash__


BOT = _Bot()
TOP = _Top()


class PredAtom(Formula):
    """Predicate atom; ``pred`` may also be a builtin relation symbol."""

    __slots__ = ("pred", "args")

    def __init__(self, pred, args=()):
        self.pred = pred
        self.args = tuple(args)
        self._hash = hash(("atom", pred, self.args))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, PredAtom) and self.pred == other.pred and self.args == other.args
        )

    __hash__ = _Node.__hash__


class Eq(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._hash = hash(("eq", left, right))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Eq) and self.left == other.left and self.right == other.right
        )

    __hash__ = _Node.__hash__


class _BinConn(Formula):
    __slots__ = ("left", "right")
    _tag = ""

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._hash = hash((self._tag, left, right))

    def __eq__(self, other):
        return self is other or (
            type(other) is type(self) and self.left == other.left and self.right == other.right
        )

    __hash__ = _Node.__hash__


class And(_BinConn):
    __slots__ = ()
    _tag = "and"


class Or(_BinConn):
    __slots__ = ()
    _tag = "or"


class Implies(_BinConn):
    __slots__ = ()
    _tag = "implies"


class _Quant(Formula):
    __slots__ = ("var", "body")
    _tag = ""

    def __init__(self, var, body):
        self.var = var
        self.body = body
        self._hash = hash((self._tag, var, body))

    def __eq__(self, other):
        return self is other or (
            type(other) is type(self) and self.var == other.var and self.body == other.body
        )

    __hash__ = _Node.__hash__


class Forall(_Quant):
    __slots__ = ()
    _tag = "forall"


class Exists(_Quant):
    __slots__ = ()
    _tag = "exists"


def neg(phi):
    return Implies(phi, BOT)


def is_neg(phi):
    return isinstance(phi, Implies) and phi.right == BOT


def conj(parts):
    parts = [p for p in parts if p is not TOP]
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts):
    if not parts:
        return BOT
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def forall(names, body):
    for name in reversed(list(names)):
        body = Forall(name, body)
    return body


# ---------------------------------------------------------------------------
# Rank, free variables, substitution


def rank(node):
    """Smallest stratum the expression lives in; set bodies sit one below."""
    if isinstance(node, (Var, Num, Val)):
        return 0
    if isinstance(node, (HApp, EApp)):
        return max((rank(a) for a in node.args), default=0)
    if isinstance(node, ExtSet):
        return max((rank(t) for m in node.members for t in m), default=0)
    if isinstance(node, IntSet):
        head_rank = max(rank(t) for t in node.head)
        return max(head_rank, rank(node.body) + 1)
    if isinstance(node, (_Bot, _Top)):
        return 0
    if isinstance(node, PredAtom):
        return max((rank(a) for a in node.args), default=0)
    if isinstance(node, Eq):
        return max(rank(node.left), rank(node.right))
    if isinstance(node, _BinConn):
        return max(rank(node.left), rank(node.right))
    if isinstance(node, _Quant):
        return rank(node.body)
    raise TypeError(f"not a term or formula: {node!r}")


def free_vars(node):
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, (Num, Val, _Bot, _Top)):
        return frozenset()
    if isinstance(node, (HApp, EApp, PredAtom)):
        out = frozenset()
        for a in node.args:
            out |= free_vars(a)
        return out
    if isinstance(node, ExtSet):
        out = frozenset()
        for m in node.members:
            for t in m:
                out |= free_vars(t)
        return out
    if isinstance(node, IntSet):
        out = frozenset()
        for t in node.head:
            out |= free_vars(t)
        out |= free_vars(node.body)
        return out - frozenset(node.bound)
    if isinstance(node, Eq):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, _BinConn):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, _Quant):
        return free_vars(node.body) - frozenset((node.var,))
    raise TypeError(f"not a term or formula: {node!r}")


def substitute(node, sub):
    """Replace free variables per ``sub`` (name -> term), respecting binders.

    Returns the original object when nothing changes, so instantiated
    formulas share subtrees and caches keyed on them stay effective.
    """
    if not sub:
        return node
    if isinstance(node, Var):
        return sub.get(node.name, node)
    if isinstance(node, (Num, Val, _Bot, _Top)):
        return node
    if isinstance(node, (HApp, EApp, PredAtom)):
        args = tuple(substitute(a, sub) for a in node.args)
        if all(a is b for a, b in zip(args, node.args)):
            return node
        return type(node)(node.pred if isinstance(node, PredAtom) else node.name, args)
    if isinstance(node, ExtSet):
        members = tuple(tuple(substitute(t, sub) for t in m) for m in node.members)
        if all(t is u for m, n in zip(members, node.members) for t, u in zip(m, n)):
            return node
        return ExtSet(members)
    if isinstance(node, IntSet):
        inner = {k: v for k, v in sub.items() if k not in node.bound}
        if not inner:
            return node
        head = tuple(substitute(t, inner) for t in node.head)
        body = substitute(node.body, inner)
        if body is node.body and all(t is u for t, u in zip(head, node.head)):
            return node
        return IntSet(node.bound, head, body)
    if isinstance(node, Eq):
        left = substitute(node.left, sub)
        right = substitute(node.right, sub)
        if left is node.left and right is node.right:
            return node
        return Eq(left, right)
    if isinstance(node, _BinConn):
        left = substitute(node.left, sub)
        right = substitute(node.right, sub)
        if left is node.left and right is node.right:
            return node
        return type(node)(left, right)
    if isinstance(node, _Quant):
        inner = {k: v for k, v in sub.items() if k != node.var}
        if not inner:
            return node
        body = substitute(node.body, inner)
        if body is node.body:
            return node
        return type(node)(node.var, body)
    raise TypeError(f"not a term or formula: {node!r}")


def map_terms(node, fn):
    """Rebuild bottom-up, passing every term through ``fn`` after its
    children have been rewritten.  Shares unchanged nodes."""
    if isinstance(node, Term):
        if isinstance(node, (Var, Num, Val)):
            return fn(node)
        if isinstance(node, (HApp, EApp)):
            args = tuple(map_terms(a, fn) for a in node.args)
            if any(a is not b for a, b in zip(args, node.args)):
                node = type(node)(node.name, args)
            return fn(node)
        if isinstance(node, ExtSet):
            members = tuple(tuple(map_terms(t, fn) for t in m) for m in node.members)
            if any(t is not u for m, n in zip(members, node.members) for t, u in zip(m, n)):
                node = ExtSet(members)
            return fn(node)
        if isinstance(node, IntSet):
            head = tuple(map_terms(t, fn) for t in node.head)
            body = map_terms(node.body, fn)
            if body is not node.body or any(t is not u for t, u in zip(head, node.head)):
                node = IntSet(node.bound, head, body)
            return fn(node)
        raise TypeError(f"not a term: {node!r}")
    if isinstance(node, (_Bot, _Top)):
        return node
    if isinstance(node, PredAtom):
        args = tuple(map_terms(a, fn) for a in node.args)
        if all(a is b for a, b in zip(args, node.args)):
            return node
        return PredAtom(node.pred, args)
    if isinstance(node, Eq):
        left = map_terms(node.left, fn)
        right = map_terms(node.right, fn)
        if left is node.left and right is node.right:
            return node
        return Eq(left, right)
    if isinstance(node, _BinConn):
        left = map_terms(node.left, fn)
        right = map_terms(node.right, fn)
        if left is node.left and right is node.right:
            return node
        return type(node)(left, right)
    if isinstance(node, _Quant):
        body = map_terms(node.body, fn)
        if body is node.body:
            return node
        return type(node)(node.var, body)
    raise TypeError(f"not a term or formula: {node!r}")


def walk(node):
    """Yield the node and all descendants (set bodies included)."""
    yield node
    if isinstance(node, (HApp, EApp, PredAtom)):
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, ExtSet):
        for m in node.members:
            for t in m:
                yield from walk(t)
    elif isinstance(node, IntSet):
        for t in node.head:
            yield from walk(t)
        yield from walk(node.body)
    elif isinstance(node, Eq):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, _BinConn):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, _Quant):
        yield from walk(node.body)


# ---------------------------------------------------------------------------
# Pretty-printing (kept parseable; see parser.parse_program)

_TERM_PREC = {"\\/": 1, "\\": 2, "/\\": 3, "+": 4, "-": 4, "*": 5, "/": 5}


def _term_str(term, parent_prec=0):
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Num):
        return str(term.value)
    if isinstance(term, Val):
        return format_value(term.value)
    if isinstance(term, HApp):
        if not term.args:
            return term.name
        return f"{term.name}({', '.join(_term_str(a) for a in term.args)})"
    if isinstance(term, EApp):
        if term.name in _TERM_PREC and len(term.args) == 2:
            prec = _TERM_PREC[term.name]
            left = _term_str(term.args[0], prec)
            right = _term_str(term.args[1], prec + 1)
            text = f"{left} {term.name} {right}"
            return f"({text})" if prec < parent_prec else text
        if term.name in AGGREGATE_NAMES and len(term.args) == 1 and isinstance(term.args[0], IntSet):
            return f"{term.name}{_term_str(term.args[0])}"
        if not term.args:
            return term.name
        return f"{term.name}({', '.join(_term_str(a) for a in term.args)})"
    if isinstance(term, ExtSet):
        return "{" + "; ".join(_tuple_str(m) for m in term.members) + "}"
    if isinstance(term, IntSet):
        head = _tuple_str(term.head)
        body = _formula_str(term.body)
        implicit = tuple(sorted(set().union(*(free_vars(t) for t in term.head)) or set()))
        if implicit == term.bound:
            return f"{{{head} : {body}}}"
        return f"{{{', '.join(term.bound)} : {head} : {body}}}"
    raise TypeError(f"not a term: {term!r}")


def _tuple_str(terms):
    if len(terms) == 1:
        return _term_str(terms[0])
    return f"({', '.join(_term_str(t) for t in terms)})"


_CONN_PREC = {"implies": 1, "or": 2, "and": 3}


def _formula_str(phi, parent_prec=0):
    if isinstance(phi, _Bot):
        return "#false"
    if isinstance(phi, _Top):
        return "#true"
    if isinstance(phi, PredAtom):
        if phi.pred in RELATION_PREDS and len(phi.args) == 2:
            return f"{_term_str(phi.args[0])} {phi.pred} {_term_str(phi.args[1])}"
        if not phi.args:
            return phi.pred
        return f"{phi.pred}({', '.join(_term_str(a) for a in phi.args)})"
    if isinstance(phi, Eq):
        return f"{_term_str(phi.left)} = {_term_str(phi.right)}"
    if isinstance(phi, Implies):
        if phi.right is BOT or phi.right == BOT:
            return f"not {_formula_str(phi.left, 4)}"
        prec = _CONN_PREC["implies"]
        text = f"{_formula_str(phi.left, prec + 1)} -> {_formula_str(phi.right, prec)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(phi, Or):
        prec = _CONN_PREC["or"]
        text = f"{_formula_str(phi.left, prec)}; {_formula_str(phi.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(phi, And):
        prec = _CONN_PREC["and"]
        text = f"{_formula_str(phi.left, prec)}, {_formula_str(phi.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(phi, Forall):
        return f"forall {phi.var} ({_formula_str(phi.body)})"
    if isinstance(phi, Exists):
        return f"exists {phi.var} ({_formula_str(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


def pretty(node):
    if isinstance(node, Term):
        return _term_str(node)
    return _formula_str(node)


def formula_statement(phi):
    """Render a closed formula as one program statement ``head :- body.``"""
    while isinstance(phi, Forall):
        phi = phi.body
    if isinstance(phi, Implies) and not (phi.right is BOT or phi.right == BOT):
        return f"{_formula_str(phi.right)} :- {_formula_str(phi.left)}."
    if isinstance(phi, Implies) and (phi.right is BOT or phi.right == BOT):
        return f":- {_formula_str(phi.left)}."
    return f"{_formula_str(phi)}."
