"""Tokenizer and recursive-descent parser for the math-expression dialect.

The dialect is deliberately small: numbers, symbols, ``+ - * / **``,
function calls (``sqrt``, ``Abs``, ``Eq``, ...), parenthesized tuples,
bracket/brace collections, comma lists, and the comparison/logic operators
that appear in inequality results (``< <= > >= | &``). Multiplication is
always explicit (``2*x``, never ``2x``) and a bare ``=`` is reserved:
equations must be spelled ``Eq(lhs, rhs)``.
"""

from __future__ import annotations

import re
import warnings
from decimal import Decimal

from .nodes import Aggregate, Binary, Call, Node, Num, Sym, Unary


class ParseError(ValueError):
    """Raised on malformed dialect text.

    Carries the byte offset of the offending token and, when known, a hint
    about what was expected there.
    """

    def __init__(self, message: str, text: str, pos: int, expected: str | None = None):
        self.byte_offset = len(text[:pos].encode("utf-8"))
        self.expected = expected
        detail = f"{message} at byte {self.byte_offset}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class ReservedConstructError(ParseError):
    """A construct the dialect forbids, such as a bare ``=``."""


class DialectWarning(UserWarning):
    """Accepted input that strays from the dialect's conventions."""


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+\-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|<=|>=|==|[+\-*/(),\[\]{}<>|&=])
    """,
    re.VERBOSE,
)

_EXACT_NUMBER_RE = re.compile(r"\d+$")


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            raise ParseError(
                f"unexpected {tok.text!r}" if tok.kind != "end" else "unexpected end of input",
                self.text,
                tok.pos,
                expected=repr(text),
            )
        return self.advance()

    def fail(self, expected: str) -> ParseError:
        tok = self.peek()
        shown = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(f"unexpected {shown}", self.text, tok.pos, expected=expected)

    # precedence ladder, lowest first

    def parse_top(self) -> Node:
        first = self.parse_or()
        if self.peek().text != ",":
            return first
        elements = [first]
        while self.peek().text == ",":
            self.advance()
            elements.append(self.parse_or())
        return Aggregate("list", tuple(elements))

    def parse_or(self) -> Node:
        node = self.parse_and()
        while self.peek().text == "|":
            self.advance()
            node = Binary("|", node, self.parse_and())
        return node

    def parse_and(self) -> Node:
        node = self.parse_comparison()
        while self.peek().text == "&":
            self.advance()
            node = Binary("&", node, self.parse_comparison())
        return node

    def parse_comparison(self) -> Node:
        node = self.parse_additive()
        tok = self.peek()
        if tok.text in ("<", "<=", ">", ">="):
            self.advance()
            return Binary(tok.text, node, self.parse_additive())
        if tok.text in ("=", "=="):
            raise ReservedConstructError(
                "bare '=' is not part of the dialect; use Eq(lhs, rhs)",
                self.text,
                tok.pos,
            )
        return node

    def parse_additive(self) -> Node:
        node = self.parse_multiplicative()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.parse_multiplicative())
        return node

    def parse_multiplicative(self) -> Node:
        node = self.parse_unary()
        while self.peek().text in ("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Node:
        tok = self.peek()
        if tok.text in ("+", "-"):
            self.advance()
            return Unary(tok.text, self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        if self.peek().text == "**":
            self.advance()
            # exponent may carry a sign: 2**-3
            return Binary("**", base, self.parse_unary())
        return base

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            if _EXACT_NUMBER_RE.match(tok.text):
                return Num(int(tok.text))
            return Num(Decimal(tok.text))
        if tok.kind == "name":
            self.advance()
            if self.peek().text == "(":
                self.advance()
                args = self.parse_elements(close=")")
                return Call(tok.text, tuple(args))
            if len(tok.text) > 1 and tok.text not in _WELL_KNOWN_NAMES:
                warnings.warn(
                    f"multi-letter symbol {tok.text!r}; the dialect prefers single letters",
                    DialectWarning,
                    stacklevel=4,
                )
            return Sym(tok.text)
        if tok.text == "(":
            self.advance()
            elements = self.parse_elements(close=")")
            if len(elements) == 1:
                return elements[0]  # plain grouping
            return Aggregate("tuple", tuple(elements))
        if tok.text == "[":
            self.advance()
            return Aggregate("list", tuple(self.parse_elements(close="]")))
        if tok.text == "{":
            self.advance()
            return Aggregate("set", tuple(self.parse_elements(close="}")))
        if tok.text in ("=", "=="):
            raise ReservedConstructError(
                "bare '=' is not part of the dialect; use Eq(lhs, rhs)",
                self.text,
                tok.pos,
            )
        raise self.fail("a number, symbol, function call, or '('")

    def parse_elements(self, close: str) -> list[Node]:
        elements: list[Node] = []
        if self.peek().text == close:
            self.advance()
            return elements
        elements.append(self.parse_or())
        while self.peek().text == ",":
            self.advance()
            elements.append(self.parse_or())
        self.expect(close)
        return elements


# names that routinely appear in tool output and are not user symbols
_WELL_KNOWN_NAMES = frozenset(
    {"pi", "oo", "zoo", "nan", "inf", "True", "False"}
)


def parse_expression(text: str) -> Node:
    """Parse dialect text into an AST.

    Raises ParseError (with byte offset and an expected-token hint) on
    malformed input, and ReservedConstructError for a bare ``=``.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", text, 0, expected="an expression")
    parser = _Parser(text)
    node = parser.parse_top()
    tok = parser.peek()
    if tok.kind != "end":
        if tok.text in ("=", "=="):
            raise ReservedConstructError(
                "bare '=' is not part of the dialect; use Eq(lhs, rhs)", text, tok.pos
            )
        raise parser.fail("end of input")
    return node
