"""
Martinet Engine - Form Language

Text syntax for form germs and the .frm file format.

    form   := term (('+' | '-') term)*
    term   := factor ('^' factor)*
    factor := atom (('*' | '/') atom)*, with '**' binding tighter
    atom   := rational | var | 'd' var | 'd(' form ')' | '(' form ')' | '-' factor

A name in the chart is a variable; otherwise 'd' followed by a chart variable is
its basis one-form. Literals are exact, so nested derivatives are evaluated at a
raised working jet and truncated at the end.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

from errors import DegreeError, ParseError, UnknownVariableError
from exterior import DiffForm, ext_d, format_form, wedge
from scalar_poly import Chart, TruncatedPoly

# --- Logging ---
logger = logging.getLogger(__name__)

# Binary operators in groups of increasing precedence.
OPERATORS = [
    [("+", "left"), ("-", "left")],
    [("^", "left")],
    [("*", "left"), ("/", "left")],
    [("**", "right")],
]
OPERATOR_PREC = {name: idx for idx, group in enumerate(OPERATORS) for name, _ in group}
OPERATOR_ASSOC = {name: assoc for group in OPERATORS for name, assoc in group}

_TOKEN_RE = re.compile(
    r"(?P<space>[ \t\r]+)|(?P<newline>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<number>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


def tokenize(source: str, first_line: int = 1) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = first_line, 0, 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        if kind == "newline":
            line, line_start = line + 1, match.end()
        elif kind not in ("space", "comment"):
            tokens.append(Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    return tokens


# --- Syntax tree ---


@dataclass(frozen=True)
class FormExpr:
    """Node of a parsed form: num, var, basis, d, neg, or a binary operator."""

    kind: str
    args: Tuple[Union["FormExpr", str, Fraction], ...]
    line: int
    column: int

    def d_depth(self) -> int:
        inner = max((a.d_depth() for a in self.args if isinstance(a, FormExpr)), default=0)
        return inner + (1 if self.kind == "d" else 0)


class _Parser:
    def __init__(self, tokens: List[Token], chart: Chart):
        self.tokens = tokens
        self.pos = 0
        self.chart = chart

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> Token:
        token = self.peek()
        if token is None:
            last = self.tokens[-1] if self.tokens else Token("op", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.column + len(last.value))
        self.pos += 1
        return token

    def expect(self, value: str) -> Token:
        token = self.advance()
        if token.value != value:
            raise ParseError(f"expected {value!r}, found {token.value!r}", token.line, token.column)
        return token

    def parse(self) -> FormExpr:
        if not self.tokens:
            raise ParseError("empty form expression", 1, 1)
        node = self.expression(0)
        token = self.peek()
        if token is not None:
            raise ParseError(f"unexpected {token.value!r}", token.line, token.column)
        return node

    def expression(self, min_prec: int) -> FormExpr:
        left = self.atom()
        while True:
            token = self.peek()
            if token is None or token.kind != "op" or token.value not in OPERATOR_PREC:
                return left
            prec = OPERATOR_PREC[token.value]
            if prec < min_prec:
                return left
            self.advance()
            next_prec = prec + 1 if OPERATOR_ASSOC[token.value] == "left" else prec
            right = self.expression(next_prec)
            left = FormExpr(token.value, (left, right), token.line, token.column)

    def atom(self) -> FormExpr:
        token = self.advance()
        if token.value == "-":
            operand = self.expression(OPERATOR_PREC["*"])
            return FormExpr("neg", (operand,), token.line, token.column)
        if token.value == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if token.kind == "number":
            return FormExpr("num", (Fraction(token.value),), token.line, token.column)
        if token.kind == "name":
            return self.name(token)
        raise ParseError(f"unexpected {token.value!r}", token.line, token.column)

    def name(self, token: Token) -> FormExpr:
        name = token.value
        if name in self.chart.vars:
            return FormExpr("var", (name,), token.line, token.column)
        following = self.peek()
        if name == "d" and following is not None and following.value == "(":
            self.advance()
            inner = self.expression(0)
            self.expect(")")
            return FormExpr("d", (inner,), token.line, token.column)
        if name.startswith("d") and name[1:] in self.chart.vars:
            return FormExpr("basis", (name[1:],), token.line, token.column)
        raise UnknownVariableError(
            f"{token.line}:{token.column}: unknown variable '{name}' in chart {self.chart.vars}"
        )


def parse_expr(text: str, chart: Chart, first_line: int = 1) -> FormExpr:
    return _Parser(tokenize(text, first_line), chart).parse()


# --- Evaluation ---


def _degree_error(node: FormExpr, message: str) -> DegreeError:
    return DegreeError(f"{node.line}:{node.column}: {message}")


def evaluate(node: FormExpr, chart: Chart, jet_order: int) -> DiffForm:
    kind = node.kind
    if kind == "num":
        return DiffForm.function(TruncatedPoly.constant(chart, node.args[0], jet_order))
    if kind == "var":
        return DiffForm.function(TruncatedPoly.variable(chart, node.args[0], jet_order))
    if kind == "basis":
        return DiffForm.basis(chart, node.args[0], jet_order)
    if kind == "d":
        return ext_d(evaluate(node.args[0], chart, jet_order))
    if kind == "neg":
        return -evaluate(node.args[0], chart, jet_order)
    left = evaluate(node.args[0], chart, jet_order)
    right = evaluate(node.args[1], chart, jet_order)
    if kind in ("+", "-"):
        if left.degree != right.degree:
            raise _degree_error(node, f"degree mismatch: {left.degree} {kind} {right.degree}")
        return left + right if kind == "+" else left - right
    if kind == "^":
        return wedge(left, right)
    if kind == "*":
        if left.degree and right.degree:
            raise _degree_error(node, "'*' needs a function operand, use '^' between forms")
        if left.degree == 0:
            return right * left.coeff(())
        return left * right.coeff(())
    if kind == "/":
        divisor = right.coeff(()) if right.degree == 0 else None
        if divisor is None or divisor.degree() > 0 or divisor.is_zero():
            raise _degree_error(node, "division only by a nonzero rational constant")
        return left * (1 / divisor.constant_term())
    if kind == "**":
        exponent = right.coeff(()) if right.degree == 0 else None
        if left.degree or exponent is None or exponent.degree() > 0:
            raise _degree_error(node, "'**' needs a function base and an integer exponent")
        k = exponent.constant_term()
        if k.denominator != 1 or k < 0:
            raise _degree_error(node, "'**' needs a non-negative integer exponent")
        return DiffForm.function(left.coeff(()) ** int(k))
    raise ParseError(f"unknown node {kind}", node.line, node.column)


def parse(text: str, chart: Chart, jet_order: int, first_line: int = 1) -> DiffForm:
    """Parse and evaluate a form expression, exact through jet_order."""
    node = parse_expr(text, chart, first_line)
    form = evaluate(node, chart, jet_order + node.d_depth())
    return form.truncate(jet_order)


def to_text(form: DiffForm) -> str:
    return format_form(form)


# --- .frm files ---


@dataclass(frozen=True)
class FormFile:
    chart: Chart
    expression: str
    first_line: int
    form: DiffForm


def parse_frm(text: str, jet_order: int) -> FormFile:
    """
    A 'chart: v1 v2 ...' line, an optional 'weights: w1 w2 ...' line, then one
    form expression over the remaining lines. '#' starts a comment.
    """
    names: Optional[List[str]] = None
    weights: Optional[List[int]] = None
    body: List[str] = []
    first_line = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped and not body:
            continue
        if names is None:
            if not stripped.startswith("chart:"):
                raise ParseError("expected 'chart:' line", number, 1)
            names = stripped[len("chart:") :].split()
            if not names:
                raise ParseError("chart declares no variables", number, 1)
            continue
        if weights is None and not body and stripped.startswith("weights:"):
            try:
                weights = [int(w) for w in stripped[len("weights:") :].split()]
            except ValueError:
                raise ParseError("weights must be integers", number, 1) from None
            continue
        if not body:
            first_line = number
        body.append(raw)
    if names is None:
        raise ParseError("missing 'chart:' line", 1, 1)
    expression = "\n".join(body).strip()
    if not expression:
        raise ParseError("missing form expression", max(first_line, 1), 1)
    chart = Chart(tuple(names), tuple(weights) if weights else None)
    form = parse(expression, chart, jet_order, first_line)
    logger.debug(f"parse_frm: chart={chart.vars} degree={form.degree} jet={form.jet_order}")
    return FormFile(chart, expression, first_line, form)


def load_frm(path: Union[str, Path], jet_order: int) -> FormFile:
    return parse_frm(Path(path).read_text(encoding="utf-8"), jet_order)


def dump_frm(form: DiffForm) -> str:
    lines = [f"chart: {' '.join(form.chart.vars)}"]
    if form.chart.weights:
        lines.append(f"weights: {' '.join(str(w) for w in form.chart.weights)}")
    lines.append(to_text(form))
    return "\n".join(lines) + "\n"
