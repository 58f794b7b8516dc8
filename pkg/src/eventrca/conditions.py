"""Boolean predicate language for conditional causal rules.

Grammar (standard precedence, NOT > AND > OR, keywords case-insensitive):

    expr       := term (OR term)*
    term       := factor (AND factor)*
    factor     := NOT factor | '(' expr ')' | comparison
    comparison := operand ('==' | '!=' | '<' | '<=' | '>' | '>=') operand
    operand    := 'source.' name | 'target.' name | literal

Literals are quoted strings, integers, reals, and true/false. Comparisons
between incompatible kinds evaluate to false (with a diagnostic) instead of
aborting an analysis; ordering comparators require numeric operands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import BadConditionReference, ConditionSyntaxError, MissingTargetEvent
from .model import Event, EventType, PropertyKind, PropertyValue, kind_of_value

ORDERING_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("==", "!=")


@dataclass(frozen=True)
class PropertyRef:
    """Reference to a property of the source or target event."""

    subject: str  # "source" | "target"
    name: str


@dataclass(frozen=True)
class Literal:
    value: PropertyValue


Operand = Union[PropertyRef, Literal]


@dataclass(frozen=True)
class Comparison:
    left: Operand
    op: str
    right: Operand


@dataclass(frozen=True)
class Not:
    operand: "ConditionExpr"


@dataclass(frozen=True)
class And:
    left: "ConditionExpr"
    right: "ConditionExpr"


@dataclass(frozen=True)
class Or:
    left: "ConditionExpr"
    right: "ConditionExpr"


ConditionExpr = Union[Comparison, Not, And, Or]


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ref>(source|target)\.[A-Za-z_][A-Za-z0-9_]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>-?\d+\.\d+([eE][+-]?\d+)?|-?\d+[eE][+-]?\d+|-?\d+)
  | (?P<string>"(\\.|[^"\\])*"|'(\\.|[^'\\])*')
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<lparen>\()
  | (?P<rparen>\))
    """,
    re.VERBOSE,
)

_ESCAPE_RE = re.compile(r"\\(.)")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ConditionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


def _unquote(raw: str) -> str:
    return _ESCAPE_RE.sub(r"\1", raw[1:-1])


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ConditionSyntaxError(f"expected {kind}, found {tok.text!r}", tok.pos)
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.text.upper() == word

    def parse(self) -> ConditionExpr:
        expr = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ConditionSyntaxError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return expr

    def expr(self) -> ConditionExpr:
        node = self.term()
        while self.at_keyword("OR"):
            self.advance()
            node = Or(node, self.term())
        return node

    def term(self) -> ConditionExpr:
        node = self.factor()
        while self.at_keyword("AND"):
            self.advance()
            node = And(node, self.factor())
        return node

    def factor(self) -> ConditionExpr:
        tok = self.peek()
        if self.at_keyword("NOT"):
            self.advance()
            return Not(self.factor())
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            self.expect("rparen")
            return node
        return self.comparison()

    def comparison(self) -> Comparison:
        left = self.operand()
        op = self.expect("op")
        right = self.operand()
        return Comparison(left, op.text, right)

    def operand(self) -> Operand:
        tok = self.peek()
        if tok.kind == "ref":
            self.advance()
            subject, name = tok.text.split(".", 1)
            return PropertyRef(subject, name)
        if tok.kind == "number":
            self.advance()
            text = tok.text
            if "." in text or "e" in text or "E" in text:
                return Literal(float(text))
            return Literal(int(text))
        if tok.kind == "string":
            self.advance()
            return Literal(_unquote(tok.text))
        if tok.kind == "word" and tok.text.lower() in ("true", "false"):
            self.advance()
            return Literal(tok.text.lower() == "true")
        raise ConditionSyntaxError(f"expected an operand, found {tok.text!r}", tok.pos)


def parse_condition(text: str) -> ConditionExpr:
    """Parse condition text into an expression tree."""
    return _Parser(text).parse()


# -- printer -----------------------------------------------------------------

_PRECEDENCE = {Or: 1, And: 2, Not: 3, Comparison: 4}


def _print_operand(operand: Operand) -> str:
    if isinstance(operand, PropertyRef):
        return f"{operand.subject}.{operand.name}"
    value = operand.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return repr(value)


def condition_to_text(expr: ConditionExpr) -> str:
    """Render an expression with minimal parentheses; parses back to itself."""
    prec = _PRECEDENCE[type(expr)]
    if isinstance(expr, Comparison):
        return f"{_print_operand(expr.left)} {expr.op} {_print_operand(expr.right)}"
    if isinstance(expr, Not):
        inner = condition_to_text(expr.operand)
        if _PRECEDENCE[type(expr.operand)] < prec:
            inner = f"({inner})"
        return f"NOT {inner}"
    word = "AND" if isinstance(expr, And) else "OR"
    left = condition_to_text(expr.left)
    if _PRECEDENCE[type(expr.left)] < prec:
        left = f"({left})"
    right = condition_to_text(expr.right)
    # right operand at equal precedence needs parens to keep left associativity
    if _PRECEDENCE[type(expr.right)] <= prec:
        right = f"({right})"
    return f"{left} {word} {right}"


# -- evaluation --------------------------------------------------------------

def _comparable(a: PropertyValue, b: PropertyValue) -> bool:
    ka, kb = kind_of_value(a), kind_of_value(b)
    numeric = {PropertyKind.INTEGER, PropertyKind.REAL}
    if ka in numeric and kb in numeric:
        return True
    return ka == kb


def _compare(op: str, a: PropertyValue, b: PropertyValue) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _resolve(
    operand: Operand,
    source: Event,
    target: Event | None,
    diagnostics: list[str] | None,
) -> tuple[bool, PropertyValue | None]:
    if isinstance(operand, Literal):
        return True, operand.value
    event = source if operand.subject == "source" else target
    if event is None:
        raise MissingTargetEvent(
            f"condition references target.{operand.name} but no target event was given"
        )
    if operand.name not in event.props:
        if diagnostics is not None:
            diagnostics.append(
                f"{event.describe()} has no property '{operand.name}'; comparison is false"
            )
        return False, None
    return True, event.props[operand.name]


def eval_condition(
    expr: ConditionExpr,
    source: Event,
    target: Event | None = None,
    diagnostics: list[str] | None = None,
) -> bool:
    """Evaluate a condition over a source event and an optional target event.

    Malformed comparisons (missing properties, mismatched kinds, ordering on
    non-numeric values) evaluate to false and append a diagnostic rather than
    raising, so one bad event cannot abort an analysis.
    """
    if isinstance(expr, Comparison):
        ok_l, left = _resolve(expr.left, source, target, diagnostics)
        ok_r, right = _resolve(expr.right, source, target, diagnostics)
        if not (ok_l and ok_r):
            return False
        assert left is not None and right is not None
        if not _comparable(left, right):
            if diagnostics is not None:
                diagnostics.append(
                    f"comparison '{condition_to_text(expr)}' mixes incompatible kinds; false"
                )
            return False
        if expr.op in ORDERING_OPS:
            numeric = {PropertyKind.INTEGER, PropertyKind.REAL}
            if kind_of_value(left) not in numeric or kind_of_value(right) not in numeric:
                if diagnostics is not None:
                    diagnostics.append(
                        f"ordering comparison '{condition_to_text(expr)}' on non-numeric values; false"
                    )
                return False
        return _compare(expr.op, left, right)
    if isinstance(expr, Not):
        return not eval_condition(expr.operand, source, target, diagnostics)
    if isinstance(expr, And):
        left = eval_condition(expr.left, source, target, diagnostics)
        right = eval_condition(expr.right, source, target, diagnostics)
        return left and right
    left = eval_condition(expr.left, source, target, diagnostics)
    right = eval_condition(expr.right, source, target, diagnostics)
    return left or right


# -- static checking ---------------------------------------------------------

def _literal_kind(value: PropertyValue) -> PropertyKind:
    return kind_of_value(value)


def check_condition_refs(
    expr: ConditionExpr,
    source_type: EventType,
    target_type: EventType | None,
) -> None:
    """Verify property references against the event-type schemas.

    `target_type` is None for dynamic rules, whose conditions are evaluated
    before any target event exists; such conditions may not mention target
    properties. Ordering comparators must have numeric operands on both sides.
    """
    numeric = {PropertyKind.INTEGER, PropertyKind.REAL}

    def operand_kind(operand: Operand) -> PropertyKind:
        if isinstance(operand, Literal):
            return _literal_kind(operand.value)
        if operand.subject == "source":
            schema_type = source_type
        else:
            if target_type is None:
                raise BadConditionReference(
                    f"target.{operand.name} is not allowed here: no target event exists"
                )
            schema_type = target_type
        kind = schema_type.kind_of(operand.name)
        if kind is None:
            raise BadConditionReference(
                f"{operand.subject}.{operand.name} is not in the schema of '{schema_type.name}'"
            )
        return kind

    def walk(node: ConditionExpr) -> None:
        if isinstance(node, Comparison):
            kl = operand_kind(node.left)
            kr = operand_kind(node.right)
            if node.op in ORDERING_OPS and (kl not in numeric or kr not in numeric):
                raise BadConditionReference(
                    f"ordering comparison '{condition_to_text(node)}' requires numeric operands"
                )
        elif isinstance(node, Not):
            walk(node.operand)
        else:
            walk(node.left)
            walk(node.right)

    walk(expr)
