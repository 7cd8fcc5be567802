"""
gainscope - Polynomial Text Parser

Recursive-descent parser for expressions such as `3.5*t1^2*t2 - 1.0` or
`-t1/(1+t2)`. Identifiers are restricted to the indeterminate families
t<k>, x<k>, e<k>, u<k>, z<k> and s.
"""
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Set

from .polynomial import Polynomial
from .rational import RationalFunction, ZeroDenominatorError


IDENTIFIER_RE = re.compile(r"^(?:[txeuz][1-9]\d*|s)$")

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()])"
    r")"
)


class ParseError(Exception):
    """Raised when expression text cannot be parsed."""

    def __init__(self, message: str, column: int, line: Optional[int] = None, text: str = ""):
        self.message = message
        self.column = column
        self.line = line
        self.text = text
        where = f"line {line}, column {column}" if line is not None else f"column {column}"
        super().__init__(f"{message} at {where}")


@dataclass
class Token:
    kind: str
    value: str
    column: int


def tokenize(text: str) -> List[Token]:
    """Split text into tokens; columns are 1-based."""
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            column = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"Unexpected character {text[column - 1]!r}", column, text=text)
        kind = match.lastgroup
        value = match.group(kind)
        column = match.start(kind) + 1
        tokens.append(Token(kind, value, column))
        pos = match.end()
    tokens.append(Token("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, allowed: Optional[Set[str]]):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.allowed = allowed

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.current
        return ParseError(message, token.column, text=self.text)

    def parse(self) -> RationalFunction:
        if self.current.kind == "end":
            raise self.error("Empty expression")
        result = self.expr()
        if self.current.kind != "end":
            raise self.error(f"Unexpected token {self.current.value!r}")
        return result

    def expr(self) -> RationalFunction:
        left = self.term()
        while self.current.kind == "op" and self.current.value in "+-":
            op = self.advance().value
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self) -> RationalFunction:
        left = self.unary()
        while self.current.kind == "op" and self.current.value in ("*", "/"):
            op_token = self.advance()
            right = self.unary()
            if op_token.value == "*":
                left = left * right
            else:
                try:
                    left = left / right
                except ZeroDenominatorError:
                    raise self.error("Division by zero", op_token)
        return left

    def unary(self) -> RationalFunction:
        if self.current.kind == "op" and self.current.value in "+-":
            op = self.advance().value
            operand = self.unary()
            return -operand if op == "-" else operand
        return self.power()

    def power(self) -> RationalFunction:
        base = self.atom()
        if self.current.kind == "op" and self.current.value in ("^", "**"):
            self.advance()
            token = self.current
            if token.kind != "number" or not token.value.isdigit():
                raise self.error("Exponent must be a nonnegative integer", token)
            self.advance()
            return base ** int(token.value)
        return base

    def atom(self) -> RationalFunction:
        token = self.current
        if token.kind == "number":
            self.advance()
            return RationalFunction(float(token.value))
        if token.kind == "ident":
            self.advance()
            name = token.value
            if not IDENTIFIER_RE.match(name):
                raise self.error(f"Unknown identifier {name!r}", token)
            if self.allowed is not None and name not in self.allowed:
                raise self.error(f"Identifier {name!r} not allowed here", token)
            return RationalFunction(Polynomial.variable(name))
        if token.kind == "op" and token.value == "(":
            self.advance()
            inner = self.expr()
            if not (self.current.kind == "op" and self.current.value == ")"):
                raise self.error("Expected ')'")
            self.advance()
            return inner
        if token.kind == "end":
            raise self.error("Unexpected end of expression", token)
        raise self.error(f"Unexpected token {token.value!r}", token)


def parse_rational(text: str, allowed: Optional[Iterable[str]] = None) -> RationalFunction:
    """
    Parse a polynomial or rational expression.

    Args:
        text: Expression text
        allowed: Optional whitelist of identifiers

    Raises:
        ParseError: With the 1-based column of the offending token
    """
    return _Parser(text, set(allowed) if allowed is not None else None).parse()


def parse_polynomial(text: str, allowed: Optional[Iterable[str]] = None) -> Polynomial:
    """Parse an expression that must reduce to a polynomial."""
    value = parse_rational(text, allowed)
    if not value.is_polynomial:
        raise ParseError("Expression is not a polynomial", 1, text=text)
    return value.num
