"""Render an AST back to dialect text.

Parenthesization is minimal but structure-preserving: for any tree this
module emits, reparsing yields a structurally equal tree.
"""

from __future__ import annotations

from fractions import Fraction

from .nodes import Aggregate, Binary, Call, Node, Num, Sym, Unary

_PREC = {
    "|": 1,
    "&": 2,
    "<": 3,
    "<=": 3,
    ">": 3,
    ">=": 3,
    "+": 4,
    "-": 4,
    "*": 5,
    "/": 5,
    "unary": 6,
    "**": 7,
    "atom": 9,
}

_SPACED = {"+", "-", "<", "<=", ">", ">=", "|", "&"}


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _PREC["unary"]
    return _PREC["atom"]


def render_expression(node: Node) -> str:
    if isinstance(node, Num):
        if isinstance(node.value, Fraction):
            return f"{node.value.numerator}/{node.value.denominator}"
        return str(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Unary):
        inner = render_expression(node.operand)
        if _prec(node.operand) < _PREC["unary"] or isinstance(node.operand, Unary):
            inner = f"({inner})"
        return f"{node.op}{inner}"
    if isinstance(node, Binary):
        return _render_binary(node)
    if isinstance(node, Call):
        args = ", ".join(render_expression(a) for a in node.args)
        return f"{node.name}({args})"
    if isinstance(node, Aggregate):
        elems = ", ".join(render_expression(e) for e in node.elements)
        if node.kind == "tuple":
            return f"({elems})"
        if node.kind == "list":
            return f"[{elems}]"
        return f"{{{elems}}}"
    raise TypeError(f"not an expression node: {node!r}")


def _render_binary(node: Binary) -> str:
    prec = _PREC[node.op]
    left = render_expression(node.left)
    right = render_expression(node.right)
    if node.op == "**":
        # right-associative: parenthesize a power or anything looser on the left
        if _prec(node.left) <= prec:
            left = f"({left})"
        if _prec(node.right) < prec:
            right = f"({right})"
    elif prec == _PREC["<"]:
        # comparisons do not chain
        if _prec(node.left) <= prec:
            left = f"({left})"
        if _prec(node.right) <= prec:
            right = f"({right})"
    else:
        # left-associative: the right child needs parens at equal precedence
        if _prec(node.left) < prec:
            left = f"({left})"
        if _prec(node.right) <= prec:
            right = f"({right})"
    if node.op in _SPACED:
        return f"{left} {node.op} {right}"
    return f"{left}{node.op}{right}"
