"""Surface syntax: tokenizer, recursive-descent parser and sugar expansion.

Programs are ASP-flavoured::

    r(1). r(2). q(1).
    q(2) :- Z = {X : r(X)}, p(Z).
    p(Y) :- Y = {X : q(X)}.
    p(a) :- count{X : p(X)} >= 1.
    sum({}) := 0.
    sum(S) := sum(S \\ {Y}) + Y :- Y in S.
    #function f/1 : {a; b}.

``,`` is conjunction, ``;`` disjunction, ``not`` negation, ``->`` nested
implication, ``{t1; t2}`` an extensional set, ``{Xs : Taus : Phi}`` (or the
one-colon short form) an intensional set, and ``f(args) := t :- body`` the
directional-assignment sugar.  Free variables of a statement are closed
universally.  ``%`` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError, SignatureError
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
    Var,
    forall,
    free_vars,
    map_terms,
    neg,
    walk,
)
from .values import EMPTY_SET, FinSet, HTerm, value_key

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<punct>:-|:=|!=|<=|>=|->|\\/|/\\|[:.,;(){}=<>+\-*/\\])
  | (?P<hash>\#[a-z]+)
  | (?P<int>\d+)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
""",
    re.VERBOSE,
)

_KEYWORDS = frozenset({"not", "in", "exists", "forall"})


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind == "ident" and lexeme in _KEYWORDS:
            kind = lexeme
        elif kind == "hash":
            word = lexeme[1:]
            if word in AGGREGATE_NAMES:
                kind, lexeme = "ident", word
            elif word in ("true", "false", "function"):
                kind = word
            else:
                raise ParseError(f"unknown directive {lexeme}", line, col)
        elif kind == "punct":
            kind = lexeme
        if kind != "ws":
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Theory & signature


@dataclass(frozen=True)
class Signature:
    """Symbol tables: constructors, evaluable functions, predicates.

    The three name spaces are disjoint; aggregate names are evaluable with
    arity 1.  ``func_ranges`` carries the declared finite graphs of the
    non-aggregate evaluable functions.
    """

    constructors: dict
    evaluables: dict
    predicates: dict
    func_ranges: dict = field(default_factory=dict)

    def is_aggregate(self, name):
        return name in AGGREGATE_NAMES

    def is_declared_function(self, name):
        return name in self.func_ranges


@dataclass(frozen=True)
class Theory:
    signature: Signature
    formulas: tuple
    source: str = ""

    def replace_formulas(self, formulas):
        return Theory(self.signature, tuple(formulas), self.source)


def theory_text(theory: Theory) -> str:
    """Render a theory back into program text, declarations included."""
    from .syntax import formula_statement
    from .values import format_value

    lines = []
    for name in sorted(theory.signature.func_ranges):
        arity = theory.signature.evaluables[name]
        values = "; ".join(format_value(v) for v in theory.signature.func_ranges[name])
        lines.append(f"#function {name}/{arity} : {{{values}}}.")
    lines.extend(formula_statement(phi) for phi in theory.formulas)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Raw statements


@dataclass
class RawRule:
    head: object  # Formula or None for a constraint
    body: object  # Formula or None
    assign: object = None  # (EApp, Term) for f(args) := t


def expand_sugar(rule):
    """Rewrite one raw rule into a plain formula.

    ``f(taus) := t :- body`` becomes ``body, t = t -> f(taus) = t`` (the
    ``t = t`` conjunct requires the assigned value to be defined); plain
    rules become ``body -> head``; facts stay as they are.
    """
    if rule.assign is not None:
        app, value = rule.assign
        defined = Eq(value, value)
        antecedent = defined if rule.body is None else And(rule.body, defined)
        return Implies(antecedent, Eq(app, value))
    head = rule.head if rule.head is not None else BOT
    if rule.body is None:
        return head
    return Implies(rule.body, head)


# ---------------------------------------------------------------------------
# Parser

_REL_TOKENS = {"=", "!=", "<=", ">=", "<", ">", "in"}


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers

    def peek(self, offset=0):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {kind!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def at(self, kind):
        return self.peek().kind == kind

    def fail(self, message, token=None):
        tok = token or self.peek()
        raise ParseError(message, tok.line, tok.column)

    def _scan_for(self, targets, stops):
        """Look ahead for one of ``targets`` at depth 0 before any stop."""
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            kind = self.tokens[i].kind
            if kind in ("(", "{"):
                depth += 1
            elif kind in (")", "}"):
                depth -= 1
            elif depth == 0 and kind in targets:
                return True
            elif depth == 0 and kind in stops or kind == "eof":
                return False
            i += 1
        return False

    # -- statements

    def parse_program(self):
        rules, directives = [], []
        while not self.at("eof"):
            if self.at("function"):
                directives.append(self.parse_function_directive())
            else:
                rules.append(self.parse_rule())
        return rules, directives

    def parse_function_directive(self):
        self.expect("function")
        name_tok = self.expect("ident")
        self.expect("/")
        arity = int(self.expect("int").text)
        self.expect(":")
        self.expect("{")
        values = [self.parse_ground_value()]
        while self.at(";"):
            self.next()
            values.append(self.parse_ground_value())
        self.expect("}")
        self.expect(".")
        if name_tok.text in AGGREGATE_NAMES:
            self.fail(f"{name_tok.text} is a builtin aggregate", name_tok)
        return name_tok.text, arity, tuple(values)

    def parse_rule(self):
        if self.at(":-"):
            self.next()
            body = self.parse_formula()
            self.expect(".")
            return RawRule(head=None, body=body)
        if self._scan_for({":="}, {":-", "."}):
            app = self.parse_term()
            if not isinstance(app, (HApp, EApp)):
                self.fail("left side of ':=' must be a function application")
            self.expect(":=")
            value = self.parse_term()
            body = None
            if self.at(":-"):
                self.next()
                body = self.parse_formula()
            self.expect(".")
            return RawRule(head=None, body=body, assign=(app, value))
        head = self.parse_formula()
        body = None
        if self.at(":-"):
            self.next()
            body = self.parse_formula()
        self.expect(".")
        return RawRule(head=head, body=body)

    # -- formulas

    def parse_formula(self):
        left = self.parse_disjunction()
        if self.at("->"):
            self.next()
            right = self.parse_formula()
            return Implies(left, right)
        return left

    def parse_disjunction(self):
        out = self.parse_conjunction()
        while self.at(";"):
            self.next()
            out = Or(out, self.parse_conjunction())
        return out

    def parse_conjunction(self):
        out = self.parse_unary()
        while self.at(","):
            self.next()
            out = And(out, self.parse_unary())
        return out

    def parse_unary(self):
        if self.at("not"):
            self.next()
            return neg(self.parse_unary())
        if self.at("exists") or self.at("forall"):
            quant = self.next().kind
            names = [self.expect("var").text]
            while self.at("var"):
                names.append(self.next().text)
            self.expect("(")
            body = self.parse_formula()
            self.expect(")")
            for name in reversed(names):
                body = Exists(name, body) if quant == "exists" else Forall(name, body)
            return body
        if self.at("true"):
            self.next()
            return TOP
        if self.at("false"):
            self.next()
            return BOT
        if self.at("(") and self._formula_parens():
            self.next()
            out = self.parse_formula()
            self.expect(")")
            return out
        return self.parse_comparison()

    def _formula_parens(self):
        """Heuristic: '(' opens a formula iff a connective or relation occurs
        at depth 1 before the matching ')'; otherwise it is a term."""
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            kind = self.tokens[i].kind
            if kind in ("(", "{"):
                depth += 1
            elif kind in (")", "}"):
                depth -= 1
                if depth == 0:
                    return False
            elif depth == 1 and kind in (
                {"->", ";", ",", "not", "exists", "forall", "true", "false"} | _REL_TOKENS
            ):
                return True
            elif kind == "eof":
                return False
            i += 1
        return False

    def parse_comparison(self):
        start = self.peek()
        left = self.parse_term()
        tok = self.peek()
        if tok.kind in _REL_TOKENS:
            self.next()
            right = self.parse_term()
            if tok.kind == "=":
                return Eq(left, right)
            return PredAtom(tok.kind, (left, right))
        if isinstance(left, HApp):
            return PredAtom(left.name, left.args)
        self.fail("expected a predicate atom or comparison", start)

    # -- terms

    _BINOPS = (("\\/",), ("\\",), ("/\\",), ("+", "-"), ("*", "/"))

    def parse_term(self, level=0):
        if level == len(self._BINOPS):
            return self.parse_primary()
        out = self.parse_term(level + 1)
        ops = self._BINOPS[level]
        while self.peek().kind in ops:
            op = self.next().kind
            right = self.parse_term(level + 1)
            out = EApp(op, (out, right))
        return out

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Num(int(tok.text))
        if tok.kind == "-":
            self.next()
            inner = self.parse_primary()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return EApp("-", (Num(0), inner))
        if tok.kind == "var":
            self.next()
            return Var(tok.text)
        if tok.kind == "ident":
            self.next()
            name = tok.text
            if self.at("{"):
                if name not in AGGREGATE_NAMES:
                    self.fail(f"only aggregates can be applied with braces, not {name!r}", tok)
                return EApp(name, (self.parse_set(),))
            if self.at("("):
                self.next()
                args = [self.parse_term()]
                while self.at(","):
                    self.next()
                    args.append(self.parse_term())
                self.expect(")")
                if name in AGGREGATE_NAMES:
                    if len(args) != 1:
                        self.fail(f"aggregate {name} takes one argument", tok)
                    return EApp(name, tuple(args))
                return HApp(name, tuple(args))
            if name in AGGREGATE_NAMES:
                self.fail(f"aggregate {name} needs an argument", tok)
            return HApp(name)
        if tok.kind == "{":
            return self.parse_set()
        if tok.kind == "(":
            self.next()
            out = self.parse_term()
            self.expect(")")
            return out
        self.fail(f"expected a term, found {tok.text or 'end of input'!r}")

    def parse_term_tuple(self):
        if self.at("(") and self._tuple_parens():
            self.next()
            items = [self.parse_term()]
            while self.at(","):
                self.next()
                items.append(self.parse_term())
            self.expect(")")
            return tuple(items)
        return (self.parse_term(),)

    def _tuple_parens(self):
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            kind = self.tokens[i].kind
            if kind in ("(", "{"):
                depth += 1
            elif kind in (")", "}"):
                depth -= 1
                if depth == 0:
                    return False
            elif depth == 1 and kind == ",":
                return True
            elif kind == "eof":
                return False
            i += 1
        return False

    def parse_set(self):
        open_tok = self.expect("{")
        if self.at("}"):
            self.next()
            return ExtSet()
        colons = self._top_level_colons()
        if colons == 0:
            members = [self.parse_term_tuple()]
            while self.at(";"):
                self.next()
                members.append(self.parse_term_tuple())
            self.expect("}")
            try:
                return ExtSet(members)
            except ValueError as exc:
                self.fail(str(exc), open_tok)
        if colons > 2:
            self.fail("too many ':' in set", open_tok)
        bound = None
        if colons == 2:
            bound = [self.expect("var").text]
            while self.at(","):
                self.next()
                bound.append(self.expect("var").text)
            self.expect(":")
        head = self.parse_term_tuple()
        self.expect(":")
        body = self.parse_formula()
        self.expect("}")
        if bound is None:
            head_vars = set()
            for t in head:
                head_vars |= free_vars(t)
            bound = sorted(head_vars)
        occurring = set()
        for t in head:
            occurring |= free_vars(t)
        occurring |= free_vars(body)
        for name in bound:
            if name not in occurring:
                self.fail(f"bound variable {name} does not occur in the set", open_tok)
        try:
            return IntSet(tuple(bound), head, body)
        except ValueError as exc:
            self.fail(str(exc), open_tok)

    def _top_level_colons(self):
        depth = 0
        count = 0
        i = self.pos
        while i < len(self.tokens):
            kind = self.tokens[i].kind
            if kind in ("(", "{"):
                depth += 1
            elif kind in (")", "}"):
                if depth == 0:
                    return count
                depth -= 1
            elif depth == 0 and kind == ":":
                count += 1
            elif kind == "eof":
                return count
            i += 1
        return count

    # -- ground values for #function ranges

    def parse_ground_value(self):
        tok = self.peek()
        term = self.parse_term()
        value = _static_value(term)
        if value is None:
            self.fail("function ranges need ground constructor terms", tok)
        return value


def _static_value(term):
    """Evaluate a variable-free constructor term to a value, else None."""
    if isinstance(term, Num):
        return term.value
    if isinstance(term, HApp):
        args = [_static_value(a) for a in term.args]
        if any(a is None for a in args):
            return None
        return HTerm(term.name, args)
    if isinstance(term, ExtSet):
        tuples = []
        for member in term.members:
            vals = [_static_value(t) for t in member]
            if any(v is None for v in vals):
                return None
            tuples.append(tuple(vals))
        return FinSet(tuples) if tuples else EMPTY_SET
    return None


# ---------------------------------------------------------------------------
# Program assembly


def parse_program(text):
    """Parse a program into a closed :class:`Theory`.

    Sugar is expanded, declared evaluable functions are resolved, free
    variables are universally closed, and the inferred signature is checked
    for arity consistency and name-space disjointness.
    """
    tokens = tokenize(text)
    rules, directives = _Parser(tokens).parse_program()

    func_ranges = {}
    func_arities = {}
    for name, arity, values in directives:
        if name in func_ranges:
            raise SignatureError(f"function {name} declared twice")
        deduped = sorted(set(values), key=value_key)
        func_ranges[name] = tuple(deduped)
        func_arities[name] = arity

    formulas = []
    for rule in rules:
        phi = expand_sugar(
            RawRule(
                head=_resolve(rule.head, func_ranges),
                body=_resolve(rule.body, func_ranges),
                assign=None
                if rule.assign is None
                else (
                    _resolve_assign_target(rule.assign[0], func_ranges),
                    _resolve(rule.assign[1], func_ranges),
                ),
            )
        )
        formulas.append(forall(sorted(free_vars(phi)), phi))

    signature = _infer_signature(formulas, func_ranges, func_arities)
    return Theory(signature, tuple(formulas), source=text)


def _resolve(node, func_ranges):
    """Rewrite constructor applications of declared function names."""
    if node is None or not func_ranges:
        return node

    def fix(term):
        if isinstance(term, HApp) and term.name in func_ranges:
            return EApp(term.name, term.args)
        return term

    return map_terms(node, fix)


def _resolve_assign_target(app, func_ranges):
    app = _resolve(app, func_ranges)
    if isinstance(app, HApp):
        raise SignatureError(
            f"':=' assigns to {app.name}, which is neither an aggregate nor "
            f"declared with #function"
        )
    return app


def _infer_signature(formulas, func_ranges, func_arities):
    constructors = {}
    evaluables = dict(func_arities)
    predicates = {}

    def note(table, kind, name, arity):
        if table.setdefault(name, arity) != arity:
            raise SignatureError(
                f"{kind} {name} used with arities {table[name]} and {arity}"
            )

    for name in AGGREGATE_NAMES:
        if name in func_ranges:
            raise SignatureError(f"{name} is a builtin aggregate")

    def note_value_constructors(value):
        if isinstance(value, HTerm):
            note(constructors, "constructor", value.name, len(value.args))
            for arg in value.args:
                note_value_constructors(arg)
        elif isinstance(value, FinSet):
            for member in value.tuples:
                for component in member:
                    note_value_constructors(component)

    for values in func_ranges.values():
        for value in values:
            note_value_constructors(value)

    for phi in formulas:
        for node in walk(phi):
            if isinstance(node, HApp):
                note(constructors, "constructor", node.name, len(node.args))
            elif isinstance(node, EApp):
                if node.name in AGGREGATE_NAMES:
                    if len(node.args) != 1:
                        raise SignatureError(f"aggregate {node.name} takes one argument")
                elif node.name in func_ranges:
                    note(evaluables, "function", node.name, len(node.args))
                elif node.name not in BUILTIN_FUNCS:
                    raise SignatureError(f"undeclared evaluable function {node.name}")
            elif isinstance(node, PredAtom) and node.pred not in RELATION_PREDS:
                note(predicates, "predicate", node.pred, len(node.args))

    for name in AGGREGATE_NAMES:
        evaluables[name] = 1

    overlap = (set(constructors) & set(evaluables)) | (set(constructors) & set(predicates)) | (
        set(evaluables) & set(predicates)
    )
    if overlap:
        raise SignatureError(
            f"symbols used in more than one role: {', '.join(sorted(overlap))}"
        )
    return Signature(constructors, evaluables, predicates, func_ranges)
