"""Concrete syntax for class-algebra expressions and where-conditions.

The expression language has two mutually recursive layers:

* class expressions: names, union ``+``, difference ``-``, intersection
  ``*``, dotted relations ``x.r`` / ``x.inv(r)``, and ``x where cond``;
* where-conditions: ternary connectives ``&``, ``V``, ``~`` over basic
  predicates (type tests, containment, comparisons, aggregates, and
  membership atoms produced by normalization).

Operator precedence: ``.`` binds tightest, then ``*``, then ``+``/``-``,
and ``where`` loosest.  Within conditions ``~`` binds tightest, then
``&``, then ``V``.  Parentheses override everywhere.

A leading ``~`` that is lexically adjacent to a comparison or containment
operator fuses into that operator (``age ~> 5`` is the atomic universal
predicate, not a negation of ``age > 5``); a free-standing ``~`` is the
true-complement connective.  Likewise ``-has`` / ``-in`` are the fused
quasi-complement containment operators.

``print_*`` renders a canonical text: ``parse(print(e))`` is structurally
identical to ``e``, and printing is deterministic, so the canonical text
of a sorted normal form can serve as a dictionary key.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .errors import SyntaxParseError, UnknownOperatorError

Value = Union[Fraction, str]

PLAIN_RELOPS = ("<", "<=", ">", ">=", "=")
FUSED_RELOPS = ("~<", "~<=", "~>", "~>=", "~=")
RELOPS = PLAIN_RELOPS + FUSED_RELOPS
CONTAINOPS = ("has", "~has", "-has", "~-has", "in", "~in", "-in", "~-in")
AGGRS = ("cnt", "sum", "avg", "std", "min", "max")
PRIMITIVE_CLASSES = ("number", "string")

RESERVED_WORDS = frozenset(
    ("where", "in", "has", "inv", "This", "number", "string", "true", "false", "V", "Pr")
) | frozenset(AGGRS)

BUILTIN_CLASSES = ("any", "empty")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class ClassName:
    name: str


@dataclass(frozen=True)
class Union_:
    left: "ClassExpr"
    right: "ClassExpr"


@dataclass(frozen=True)
class Intersection:
    left: "ClassExpr"
    right: "ClassExpr"


@dataclass(frozen=True)
class Difference:
    left: "ClassExpr"
    right: "ClassExpr"


@dataclass(frozen=True)
class Dot:
    base: "ClassExpr"
    relation: str
    inverted: bool = False


@dataclass(frozen=True)
class Where:
    base: "ClassExpr"
    cond: "WhereCond"


ClassExpr = Union[ClassName, Union_, Intersection, Difference, Dot, Where]


@dataclass(frozen=True)
class And:
    left: "WhereCond"
    right: "WhereCond"


@dataclass(frozen=True)
class Or:
    left: "WhereCond"
    right: "WhereCond"


@dataclass(frozen=True)
class Not:
    operand: "WhereCond"


@dataclass(frozen=True)
class TrueCond:
    pass


@dataclass(frozen=True)
class FalseCond:
    pass


TRUE_COND = TrueCond()
FALSE_COND = FalseCond()


@dataclass(frozen=True)
class AttrPath:
    """Dotted chain of (non-inverted) relation names ending in an attribute."""

    relations: Tuple[str, ...]
    attribute: str


@dataclass(frozen=True)
class PathStep:
    relation: str
    inverted: bool = False


@dataclass(frozen=True)
class TypeTest:
    path: AttrPath
    primitive: str  # "number" | "string"


@dataclass(frozen=True)
class Contain:
    path: AttrPath
    op: str  # one of CONTAINOPS
    values: Tuple[Value, ...]  # canonically sorted, duplicate-free


@dataclass(frozen=True)
class Compare:
    path: AttrPath
    op: str  # one of RELOPS
    constant: Value


@dataclass(frozen=True)
class AggregateCompare:
    aggr: str  # one of AGGRS
    path: AttrPath
    op: str  # one of RELOPS
    constant: Value


@dataclass(frozen=True)
class Membership:
    """``This in C`` (empty path) or ``inv(r1.r2...) in C``."""

    path: Tuple[PathStep, ...]
    target: ClassExpr


BasicPredicate = Union[TypeTest, Contain, Compare, AggregateCompare, Membership]
WhereCond = Union[And, Or, Not, TrueCond, FalseCond, BasicPredicate]


def value_set(values: Sequence[Value]) -> Tuple[Value, ...]:
    """Canonical duplicate-free ordering for containment-set literals."""
    keyed = {(_value_sort_key(v)): v for v in values}
    return tuple(keyed[k] for k in sorted(keyed))


def _value_sort_key(v: Value):
    if isinstance(v, Fraction):
        return (0, v, "")
    return (1, Fraction(0), v)


# ---------------------------------------------------------------------------
# Lexer

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHARS = _IDENT_START | set("0123456789")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER STRING OP EOF
    text: str
    pos: int
    value: Optional[Value] = None


def _is_ident_char(ch: str) -> bool:
    return ch in _IDENT_CHARS


def tokenize(source: str) -> list:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch in _IDENT_START:
            j = i + 1
            while j < n and _is_ident_char(source[j]):
                j += 1
            tokens.append(Token("IDENT", source[i:j], start))
            i = j
            continue
        if ch.isdigit():
            i = _lex_number(source, i, tokens)
            continue
        if ch == '"':
            i = _lex_string(source, i, tokens)
            continue
        if ch == "~":
            fused = _fused_after_tilde(source, i)
            if fused:
                tokens.append(Token("OP", fused, start))
                i += len(fused)
                continue
            tokens.append(Token("OP", "~", start))
            i += 1
            continue
        if ch == "-":
            fused = _fused_quasi(source, i)
            if fused:
                tokens.append(Token("OP", fused, start))
                i += len(fused)
                continue
            tokens.append(Token("OP", "-", start))
            i += 1
            continue
        if ch in "<>":
            if i + 1 < n and source[i + 1] == "=":
                tokens.append(Token("OP", source[i : i + 2], start))
                i += 2
            else:
                tokens.append(Token("OP", ch, start))
                i += 1
            continue
        if ch in "=+*().{},&|":
            tokens.append(Token("OP", ch, start))
            i += 1
            continue
        raise SyntaxParseError(f"unexpected character {ch!r}", position=i)
    tokens.append(Token("EOF", "", n))
    return tokens


def _fused_after_tilde(source: str, i: int) -> Optional[str]:
    """A ``~`` fuses with an immediately adjacent relop or containop."""
    rest = source[i + 1 :]
    for op in ("<=", ">=", "<", ">", "="):
        if rest.startswith(op):
            return "~" + op
    for word in ("-has", "-in", "has", "in"):
        if rest.startswith(word):
            after = i + 1 + len(word)
            if after >= len(source) or not _is_ident_char(source[after]):
                return "~" + word
    return None


def _fused_quasi(source: str, i: int) -> Optional[str]:
    rest = source[i + 1 :]
    for word in ("has", "in"):
        if rest.startswith(word):
            after = i + 1 + len(word)
            if after >= len(source) or not _is_ident_char(source[after]):
                return "-" + word
    return None


def _lex_number(source: str, i: int, tokens: list) -> int:
    start = i
    n = len(source)
    j = i
    while j < n and source[j].isdigit():
        j += 1
    if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
        j += 1
        while j < n and source[j].isdigit():
            j += 1
    elif j < n and source[j] == "/" and j + 1 < n and source[j + 1].isdigit():
        j += 1
        while j < n and source[j].isdigit():
            j += 1
    text = source[start:j]
    tokens.append(Token("NUMBER", text, start, value=Fraction(text)))
    return j


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


def _lex_string(source: str, i: int, tokens: list) -> int:
    start = i
    i += 1
    out = []
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == '"':
            tokens.append(Token("STRING", source[start : i + 1], start, value="".join(out)))
            return i + 1
        if ch == "\\":
            if i + 1 >= n:
                break
            nxt = source[i + 1]
            if nxt in _ESCAPES:
                out.append(_ESCAPES[nxt])
                i += 2
                continue
            if nxt == "u" and i + 5 < n:
                out.append(chr(int(source[i + 2 : i + 6], 16)))
                i += 6
                continue
            raise SyntaxParseError(f"bad escape \\{nxt}", position=i)
        out.append(ch)
        i += 1
    raise SyntaxParseError("unterminated string literal", position=start)


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind != "OP" or tok.text != text:
            raise SyntaxParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", position=tok.pos)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise SyntaxParseError(f"expected {what}, found {tok.text or 'end of input'!r}", position=tok.pos)
        return self.next()

    def at_op(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in texts

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.text in words

    def done(self) -> bool:
        return self.peek().kind == "EOF"

    def require_done(self):
        tok = self.peek()
        if tok.kind != "EOF":
            raise SyntaxParseError(f"trailing input at {tok.text!r}", position=tok.pos)

    # -- class expressions ---------------------------------------------------

    def class_expr(self) -> ClassExpr:
        expr = self.sum_expr()
        while self.at_word("where"):
            self.next()
            cond = self.where_cond()
            expr = Where(expr, cond)
        return expr

    def sum_expr(self) -> ClassExpr:
        expr = self.prod_expr()
        while self.at_op("+", "-"):
            op = self.next().text
            right = self.prod_expr()
            expr = Union_(expr, right) if op == "+" else Difference(expr, right)
        return expr

    def prod_expr(self) -> ClassExpr:
        expr = self.dot_expr()
        while self.at_op("*"):
            self.next()
            expr = Intersection(expr, self.dot_expr())
        return expr

    def dot_expr(self) -> ClassExpr:
        expr = self.class_atom()
        while self.at_op("."):
            self.next()
            if self.at_word("inv"):
                self.next()
                self.expect_op("(")
                rel = self.expect_ident("relation name").text
                self.expect_op(")")
                expr = Dot(expr, rel, inverted=True)
            else:
                rel = self.expect_ident("relation name").text
                expr = Dot(expr, rel)
        return expr

    def class_atom(self) -> ClassExpr:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "(":
            self.next()
            expr = self.class_expr()
            self.expect_op(")")
            return expr
        if tok.kind == "IDENT":
            if tok.text in RESERVED_WORDS:
                raise SyntaxParseError(f"{tok.text!r} cannot be used as a class name", position=tok.pos)
            self.next()
            return ClassName(tok.text)
        raise SyntaxParseError(f"expected class expression, found {tok.text or 'end of input'!r}", position=tok.pos)

    # -- where conditions -----------------------------------------------------

    def where_cond(self) -> WhereCond:
        cond = self.and_cond()
        while self.at_word("V"):
            self.next()
            cond = Or(cond, self.and_cond())
        return cond

    def and_cond(self) -> WhereCond:
        cond = self.not_cond()
        while self.at_op("&"):
            self.next()
            cond = And(cond, self.not_cond())
        return cond

    def not_cond(self) -> WhereCond:
        if self.at_op("~"):
            self.next()
            return Not(self.not_cond())
        if self.at_op("("):
            self.next()
            cond = self.where_cond()
            self.expect_op(")")
            return cond
        return self.basic_predicate()

    def basic_predicate(self) -> BasicPredicate:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise SyntaxParseError(f"expected predicate, found {tok.text or 'end of input'!r}", position=tok.pos)
        if tok.text == "true":
            self.next()
            return TRUE_COND
        if tok.text == "false":
            self.next()
            return FALSE_COND
        if tok.text in AGGRS:
            return self.aggregate_predicate()
        if tok.text == "This":
            self.next()
            self.expect_membership_in(tok)
            return Membership((), self.membership_target())
        if tok.text == "inv":
            self.next()
            self.expect_op("(")
            path = self.relation_path()
            self.expect_op(")")
            self.expect_membership_in(tok)
            return Membership(path, self.membership_target())
        path = self.attr_path()
        return self.predicate_tail(path)

    def expect_membership_in(self, head: Token):
        tok = self.peek()
        if not (tok.kind == "IDENT" and tok.text == "in"):
            raise SyntaxParseError(f"expected 'in' after {head.text}", position=tok.pos)
        self.next()

    def membership_target(self) -> ClassExpr:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "(":
            self.next()
            expr = self.class_expr()
            self.expect_op(")")
            return expr
        if tok.kind == "IDENT" and (tok.text in BUILTIN_CLASSES or tok.text not in RESERVED_WORDS):
            self.next()
            return ClassName(tok.text)
        raise SyntaxParseError(f"expected class for membership target, found {tok.text!r}", position=tok.pos)

    def relation_path(self) -> Tuple[PathStep, ...]:
        steps = [self.relation_step()]
        while self.at_op("."):
            self.next()
            steps.append(self.relation_step())
        return tuple(steps)

    def relation_step(self) -> PathStep:
        if self.at_word("inv"):
            self.next()
            self.expect_op("(")
            rel = self.expect_ident("relation name").text
            self.expect_op(")")
            return PathStep(rel, inverted=True)
        return PathStep(self.expect_ident("relation name").text)

    def aggregate_predicate(self) -> AggregateCompare:
        aggr = self.next().text
        self.expect_op("(")
        path = self.attr_path()
        self.expect_op(")")
        op = self.relop()
        const_tok = self.peek()
        const = self.constant()
        if isinstance(const, str):
            raise SyntaxParseError(
                f"aggregate {aggr} requires a numeric comparison constant", position=const_tok.pos
            )
        return AggregateCompare(aggr, path, op, const)

    def attr_path(self) -> AttrPath:
        names = [self.expect_ident("attribute or relation name").text]
        while self.at_op("."):
            self.next()
            names.append(self.expect_ident("attribute name").text)
        return AttrPath(tuple(names[:-1]), names[-1])

    def predicate_tail(self, path: AttrPath) -> BasicPredicate:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text == "in":
            self.next()
            nxt = self.peek()
            if nxt.kind == "IDENT" and nxt.text in PRIMITIVE_CLASSES:
                self.next()
                return TypeTest(path, nxt.text)
            if nxt.kind == "OP" and nxt.text == "{":
                return Contain(path, "in", self.set_literal())
            raise SyntaxParseError(
                "expected 'number', 'string' or a value set after 'in'", position=nxt.pos
            )
        if tok.kind == "IDENT" and tok.text == "has":
            self.next()
            return Contain(path, "has", self.set_literal())
        if tok.kind == "OP" and tok.text in CONTAINOPS:
            self.next()
            return Contain(path, tok.text, self.set_literal())
        if tok.kind == "OP" and tok.text in RELOPS:
            op = self.relop()
            return Compare(path, op, self.constant())
        raise SyntaxParseError(f"expected comparison or containment operator, found {tok.text!r}", position=tok.pos)

    def relop(self) -> str:
        tok = self.peek()
        if tok.kind == "OP" and tok.text in RELOPS:
            self.next()
            return tok.text
        raise UnknownOperatorError(f"expected comparison operator, found {tok.text!r}", position=tok.pos)

    def set_literal(self) -> Tuple[Value, ...]:
        self.expect_op("{")
        values = []
        if not self.at_op("}"):
            values.append(self.constant())
            while self.at_op(","):
                self.next()
                values.append(self.constant())
        self.expect_op("}")
        return value_set(values)

    def constant(self) -> Value:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return tok.value
        if tok.kind == "STRING":
            self.next()
            return tok.value
        if tok.kind == "OP" and tok.text == "-":
            self.next()
            num = self.peek()
            if num.kind != "NUMBER":
                raise SyntaxParseError("expected number after '-'", position=num.pos)
            self.next()
            return -num.value
        raise SyntaxParseError(f"expected constant, found {tok.text or 'end of input'!r}", position=tok.pos)

    # -- probability constraints ----------------------------------------------

    def prob_constraint(self):
        """Parse ``Pr(A|B) op bound`` or ``Pr(A) op bound``.

        Returns (A, B_or_None, op, bound); validation of op/bound ranges
        belongs to the probability layer.
        """
        head = self.peek()
        if not (head.kind == "IDENT" and head.text == "Pr"):
            raise SyntaxParseError("expected 'Pr'", position=head.pos)
        self.next()
        self.expect_op("(")
        a = self.class_expr()
        b = None
        if self.at_op("|"):
            self.next()
            b = self.class_expr()
        self.expect_op(")")
        tok = self.peek()
        if not (tok.kind == "OP" and tok.text in ("<", "<=", ">", ">=")):
            raise SyntaxParseError(
                f"expected one of <, <=, >, >= in probability constraint, found {tok.text!r}",
                position=tok.pos,
            )
        self.next()
        bound_tok = self.peek()
        bound = self.constant()
        if not isinstance(bound, Fraction):
            raise SyntaxParseError("probability bound must be a number", position=bound_tok.pos)
        return a, b, tok.text, bound


def parse_class_expr(text: str) -> ClassExpr:
    p = _Parser(text)
    expr = p.class_expr()
    p.require_done()
    return expr


def parse_where_cond(text: str) -> WhereCond:
    p = _Parser(text)
    cond = p.where_cond()
    p.require_done()
    return cond


def parse_prob_constraint_parts(text: str):
    p = _Parser(text)
    parts = p.prob_constraint()
    p.require_done()
    return parts


# ---------------------------------------------------------------------------
# Canonical printer

_CLS_WHERE, _CLS_SUM, _CLS_PROD, _CLS_DOT, _CLS_ATOM = 0, 1, 2, 3, 4
_CND_OR, _CND_AND, _CND_NOT, _CND_ATOM = 0, 1, 2, 3


def print_value(v: Value) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    out = ['"']
    for ch in v:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _attr_path_text(path: AttrPath) -> str:
    return ".".join(path.relations + (path.attribute,))


def _rel_path_text(path: Tuple[PathStep, ...]) -> str:
    return ".".join(f"inv({s.relation})" if s.inverted else s.relation for s in path)


def print_class_expr(expr: ClassExpr) -> str:
    return _class_text(expr, _CLS_WHERE)


def _class_text(expr: ClassExpr, level: int) -> str:
    if isinstance(expr, ClassName):
        return expr.name
    if isinstance(expr, Where):
        text = f"{_class_text(expr.base, _CLS_SUM)} where {print_where_cond(expr.cond)}"
        return f"({text})" if level > _CLS_WHERE else text
    if isinstance(expr, (Union_, Difference)):
        op = "+" if isinstance(expr, Union_) else "-"
        text = f"{_class_text(expr.left, _CLS_SUM)}{op}{_class_text(expr.right, _CLS_PROD)}"
        return f"({text})" if level > _CLS_SUM else text
    if isinstance(expr, Intersection):
        text = f"{_class_text(expr.left, _CLS_PROD)}*{_class_text(expr.right, _CLS_DOT)}"
        return f"({text})" if level > _CLS_PROD else text
    if isinstance(expr, Dot):
        step = f"inv({expr.relation})" if expr.inverted else expr.relation
        return f"{_class_text(expr.base, _CLS_DOT)}.{step}"
    raise TypeError(f"not a class expression: {expr!r}")


def print_where_cond(cond: WhereCond) -> str:
    return _cond_text(cond, _CND_OR)


def _cond_text(cond: WhereCond, level: int) -> str:
    if isinstance(cond, Or):
        text = f"{_cond_text(cond.left, _CND_OR)} V {_cond_text(cond.right, _CND_AND)}"
        return f"({text})" if level > _CND_OR else text
    if isinstance(cond, And):
        text = f"{_cond_text(cond.left, _CND_AND)}&{_cond_text(cond.right, _CND_NOT)}"
        return f"({text})" if level > _CND_AND else text
    if isinstance(cond, Not):
        return f"~{_cond_text(cond.operand, _CND_NOT)}"
    return print_predicate(cond)


def _membership_target_text(target: ClassExpr) -> str:
    if isinstance(target, ClassName):
        return target.name
    return f"({print_class_expr(target)})"


def print_predicate(pred: WhereCond) -> str:
    if isinstance(pred, TrueCond):
        return "true"
    if isinstance(pred, FalseCond):
        return "false"
    if isinstance(pred, TypeTest):
        return f"{_attr_path_text(pred.path)} in {pred.primitive}"
    if isinstance(pred, Contain):
        inner = ",".join(print_value(v) for v in pred.values)
        return f"{_attr_path_text(pred.path)} {pred.op} {{{inner}}}"
    if isinstance(pred, Compare):
        return f"{_attr_path_text(pred.path)}{pred.op}{print_value(pred.constant)}"
    if isinstance(pred, AggregateCompare):
        return f"{pred.aggr}({_attr_path_text(pred.path)}){pred.op}{print_value(pred.constant)}"
    if isinstance(pred, Membership):
        target = _membership_target_text(pred.target)
        if not pred.path:
            return f"This in {target}"
        return f"inv({_rel_path_text(pred.path)}) in {target}"
    raise TypeError(f"not a predicate: {pred!r}")
