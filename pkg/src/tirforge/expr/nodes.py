"""AST node types for the restricted math-expression dialect.

Nodes are frozen dataclasses: structural equality comes from ``==`` and
instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

Node = object  # union of the dataclasses below


@dataclass(frozen=True)
class Num:
    """Numeric atom.

    ``int`` and ``Fraction`` values are exact; ``Decimal`` marks a literal
    that carried a decimal point (or exponent) in the source text.
    """

    value: int | Fraction | Decimal


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "+"
    operand: Node


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ** < <= > >= | &
    left: Node
    right: Node


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Node, ...]


@dataclass(frozen=True)
class Aggregate:
    kind: str  # "tuple" | "list" | "set"
    elements: tuple[Node, ...]

    def canonical_elements(self) -> tuple[Node, ...]:
        """Order-independent view; element order in ``elements`` is as parsed."""
        return tuple(sorted(self.elements, key=sort_key))


def sort_key(node: Node) -> tuple:
    """Deterministic recursive ordering key used for canonical set views."""
    if isinstance(node, Num):
        return (0, float(Fraction(str(node.value))), str(node.value))
    if isinstance(node, Sym):
        return (1, node.name)
    if isinstance(node, Unary):
        return (2, node.op, sort_key(node.operand))
    if isinstance(node, Binary):
        return (3, node.op, sort_key(node.left), sort_key(node.right))
    if isinstance(node, Call):
        return (4, node.name, tuple(sort_key(a) for a in node.args))
    if isinstance(node, Aggregate):
        return (5, node.kind, tuple(sort_key(e) for e in node.elements))
    raise TypeError(f"not an expression node: {node!r}")


def free_symbols(node: Node) -> set[str]:
    """All symbol names appearing in the tree (constants not filtered)."""
    out: set[str] = set()
    _collect_symbols(node, out)
    return out


def _collect_symbols(node: Node, out: set[str]) -> None:
    if isinstance(node, Sym):
        out.add(node.name)
    elif isinstance(node, Unary):
        _collect_symbols(node.operand, out)
    elif isinstance(node, Binary):
        _collect_symbols(node.left, out)
        _collect_symbols(node.right, out)
    elif isinstance(node, Call):
        for a in node.args:
            _collect_symbols(a, out)
    elif isinstance(node, Aggregate):
        for e in node.elements:
            _collect_symbols(e, out)
