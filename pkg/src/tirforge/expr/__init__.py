"""Parsing, rendering, and equivalence checking for the math-expression dialect."""

from .boxed import UnbalancedBraces, extract_boxed, normalize_answer_text
from .equiv import (
    DEFAULT_POLICY,
    DIFFERENT,
    EQUIVALENT,
    UNKNOWN,
    EquivalencePolicy,
    EquivalenceVerdict,
    answer_to_node,
    equivalence_check,
)
from .nodes import Aggregate, Binary, Call, Num, Sym, Unary, free_symbols
from .parse import DialectWarning, ParseError, ReservedConstructError, parse_expression
from .render import render_expression

__all__ = [
    "Aggregate",
    "Binary",
    "Call",
    "DEFAULT_POLICY",
    "DIFFERENT",
    "DialectWarning",
    "EQUIVALENT",
    "EquivalencePolicy",
    "EquivalenceVerdict",
    "Num",
    "ParseError",
    "ReservedConstructError",
    "Sym",
    "UNKNOWN",
    "Unary",
    "UnbalancedBraces",
    "answer_to_node",
    "equivalence_check",
    "extract_boxed",
    "free_symbols",
    "normalize_answer_text",
    "parse_expression",
    "render_expression",
]
