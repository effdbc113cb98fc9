"""Layered mathematical-equivalence checking for answer strings.

The check escalates through cheap deterministic layers:

1. exact string equality after whitespace normalization;
2. parse both sides (after LaTeX normalization) and compare structurally;
3. constant expressions are evaluated at high precision and compared with
   a relative tolerance; expressions with free variables are compared
   pointwise on a fixed-seed sample of the variable domain.

Anything the local layers cannot decide comes back Unknown so the caller
can escalate (symbolic executor, LLM judge). Collections compare
element-wise: braces/brackets are unordered solution sets, parenthesized
tuples stay ordered.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import mpmath

from .boxed import normalize_answer_text
from .nodes import Aggregate, Binary, Call, Node, Num, Sym, Unary, free_symbols
from .parse import ParseError, parse_expression

EQUIVALENT = "equivalent"
DIFFERENT = "different"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class EquivalencePolicy:
    methods: tuple[str, ...] = ("exact", "numeric")
    seed: int = 1729
    samples: int = 16
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    precision: int = 50  # working decimal digits
    max_redraw_factor: int = 3


@dataclass(frozen=True)
class EquivalenceVerdict:
    outcome: str  # equivalent | different | unknown
    method: str | None  # exact | numeric-sampling | executor-symbolic | llm-judge
    note: str = ""

    @property
    def is_equivalent(self) -> bool:
        return self.outcome == EQUIVALENT


DEFAULT_POLICY = EquivalencePolicy()

_CONSTANT_NAMES = {"pi", "E", "I", "oo", "True", "False"}


class _Unsupported(Exception):
    """Expression uses a construct the numeric evaluator cannot handle."""


class _BadPoint(Exception):
    """Evaluation blew up at this sample point; redraw."""


def equivalence_check(
    a: str, b: str, policy: EquivalencePolicy = DEFAULT_POLICY
) -> EquivalenceVerdict:
    """Decide whether two answer strings denote the same mathematical value."""
    if not a or not b:
        return EquivalenceVerdict(UNKNOWN, None, "empty input")
    if "exact" in policy.methods and _squash_ws(a) == _squash_ws(b):
        return EquivalenceVerdict(EQUIVALENT, "exact", "string equality")
    if "numeric" not in policy.methods:
        return EquivalenceVerdict(UNKNOWN, None, "numeric layer disabled by policy")
    try:
        node_a = answer_to_node(a)
    except (ParseError, ValueError) as exc:
        return EquivalenceVerdict(UNKNOWN, None, f"left side unparseable: {exc}")
    try:
        node_b = answer_to_node(b)
    except (ParseError, ValueError) as exc:
        return EquivalenceVerdict(UNKNOWN, None, f"right side unparseable: {exc}")
    if node_a == node_b:
        return EquivalenceVerdict(EQUIVALENT, "exact", "structurally equal after normalization")
    rng = random.Random(policy.seed)
    outcome, note = _compare(node_a, node_b, policy, rng)
    return EquivalenceVerdict(outcome, "numeric-sampling", note)


def answer_to_node(text: str) -> Node:
    """Normalize an answer string and parse it into a comparison-ready node."""
    normalized = normalize_answer_text(text)
    if not normalized:
        raise ValueError("nothing left after normalization")
    node = parse_expression(normalized)
    node = _fold_constructors(node)
    node = _strip_naming_eq(node)
    return _unwrap_singletons(node)


def _squash_ws(s: str) -> str:
    return re.sub(r"\s+", " ", s).strip()


# --- node normalization ---


def _fold_constructors(node: Node) -> Node:
    """Fold serialized constructor calls (Integer, Pow, Tuple, ...) into core nodes."""
    if isinstance(node, Unary):
        return Unary(node.op, _fold_constructors(node.operand))
    if isinstance(node, Binary):
        return Binary(node.op, _fold_constructors(node.left), _fold_constructors(node.right))
    if isinstance(node, Aggregate):
        return Aggregate(node.kind, tuple(_fold_constructors(e) for e in node.elements))
    if not isinstance(node, Call):
        return node
    args = tuple(_fold_constructors(a) for a in node.args)
    name = node.name
    if name in ("Integer", "Float") and len(args) == 1:
        return args[0]
    if name == "Rational" and len(args) == 2:
        return Binary("/", args[0], args[1])
    if name == "Pow" and len(args) == 2:
        return Binary("**", args[0], args[1])
    if name in ("Mul", "Add") and len(args) >= 1:
        op = "*" if name == "Mul" else "+"
        out = args[0]
        for arg in args[1:]:
            out = Binary(op, out, arg)
        return out
    if name == "Tuple":
        return Aggregate("tuple", args)
    if name in ("FiniteSet", "set"):
        return Aggregate("set", args)
    if name == "EmptySet" and not args:
        return Aggregate("set", ())
    return Call(name, args)


def _strip_naming_eq(node: Node) -> Node:
    """``Eq(x, value)`` used as an answer means ``value``."""
    if isinstance(node, Call) and node.name == "Eq" and len(node.args) == 2:
        lhs = node.args[0]
        if isinstance(lhs, Sym) or (
            isinstance(lhs, Aggregate) and all(isinstance(e, Sym) for e in lhs.elements)
        ):
            return _strip_naming_eq(node.args[1])
    if isinstance(node, Aggregate):
        return Aggregate(node.kind, tuple(_strip_naming_eq(e) for e in node.elements))
    return node


def _unwrap_singletons(node: Node) -> Node:
    while isinstance(node, Aggregate) and node.kind in ("list", "set") and len(node.elements) == 1:
        node = node.elements[0]
    return node


# --- comparison ---


def _compare(a: Node, b: Node, policy: EquivalencePolicy, rng: random.Random) -> tuple[str, str]:
    a_agg = isinstance(a, Aggregate)
    b_agg = isinstance(b, Aggregate)
    if a_agg != b_agg:
        return DIFFERENT, "collection vs scalar"
    if a_agg and b_agg:
        if len(a.elements) != len(b.elements):
            return DIFFERENT, f"collection sizes {len(a.elements)} vs {len(b.elements)}"
        ordered = "tuple" in (a.kind, b.kind)
        if ordered:
            for x, y in zip(a.elements, b.elements):
                outcome, note = _compare(x, y, policy, rng)
                if outcome != EQUIVALENT:
                    return outcome, f"element mismatch: {note}"
            return EQUIVALENT, "element-wise equal"
        return _compare_unordered(a.elements, b.elements, policy, rng)
    return _compare_values(a, b, policy, rng)


def _compare_unordered(
    left: tuple[Node, ...], right: tuple[Node, ...], policy: EquivalencePolicy, rng: random.Random
) -> tuple[str, str]:
    remaining = list(right)
    saw_unknown = False
    for item in left:
        matched = None
        for i, candidate in enumerate(remaining):
            outcome, _ = _compare(item, candidate, policy, rng)
            if outcome == EQUIVALENT:
                matched = i
                break
            if outcome == UNKNOWN:
                saw_unknown = True
        if matched is None:
            if saw_unknown:
                return UNKNOWN, "unordered match inconclusive"
            return DIFFERENT, "no counterpart for an element"
        remaining.pop(matched)
    return EQUIVALENT, "unordered collections match"


def _compare_values(a: Node, b: Node, policy: EquivalencePolicy, rng: random.Random) -> tuple[str, str]:
    variables = sorted((free_symbols(a) | free_symbols(b)) - _CONSTANT_NAMES)
    # a bare multi-letter word is more likely prose than a variable; abstain
    # rather than risk a false Different on sampled nonsense
    prose_like = [v for v in variables if v.isalpha() and len(v) >= 2]
    if prose_like:
        return UNKNOWN, f"prose-like symbols {prose_like} defeat sampling"
    with mpmath.workdps(policy.precision):
        if not variables:
            try:
                va = _eval(a, {})
                vb = _eval(b, {})
            except _Unsupported as exc:
                return UNKNOWN, f"unsupported construct: {exc}"
            except _BadPoint:
                return UNKNOWN, "constant evaluation did not converge"
            return _verdict_for_pair(va, vb, policy, "high-precision constant evaluation")

        points_needed = policy.samples
        draws_left = policy.samples * policy.max_redraw_factor
        checked = 0
        while checked < points_needed and draws_left > 0:
            draws_left -= 1
            env = {
                name: mpmath.mpf(rng.uniform(0.1, 2.0)) * rng.choice((-1, 1))
                for name in variables
            }
            try:
                va = _eval(a, env)
                vb = _eval(b, env)
            except _Unsupported as exc:
                return UNKNOWN, f"unsupported construct: {exc}"
            except _BadPoint:
                continue
            outcome, note = _verdict_for_pair(va, vb, policy, "")
            if outcome == DIFFERENT:
                at = ", ".join(f"{k}={float(v):.6g}" for k, v in env.items())
                return DIFFERENT, f"values differ at {at}"
            if outcome == UNKNOWN:
                return UNKNOWN, note
            checked += 1
        if checked < points_needed:
            return UNKNOWN, "too many singular sample points"
        return EQUIVALENT, f"agree at {checked} sampled points"


def _verdict_for_pair(va, vb, policy: EquivalencePolicy, note: str) -> tuple[str, str]:
    if isinstance(va, bool) or isinstance(vb, bool):
        if not (isinstance(va, bool) and isinstance(vb, bool)):
            return DIFFERENT, "boolean vs numeric value"
        return (EQUIVALENT, note) if va == vb else (DIFFERENT, "boolean values differ")
    diff = abs(va - vb)
    bound = max(policy.abs_tol, policy.rel_tol * max(abs(va), abs(vb)))
    if diff <= bound:
        return EQUIVALENT, note
    return DIFFERENT, note or f"difference {mpmath.nstr(diff, 5)} exceeds tolerance"


# --- numeric evaluation ---


def _to_mp(value) -> mpmath.mpf:
    if isinstance(value, int):
        return mpmath.mpf(value)
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / mpmath.mpf(value.denominator)
    if isinstance(value, Decimal):
        return mpmath.mpf(str(value))
    raise _Unsupported(f"numeric payload {value!r}")


def _as_number(v):
    if isinstance(v, bool):
        raise _Unsupported("boolean used as a number")
    return v


def _real(v) -> mpmath.mpf:
    if isinstance(v, mpmath.mpc):
        if abs(v.imag) > 1e-30:
            raise _Unsupported("comparison of complex values")
        return v.real
    return v


def _check_finite(v):
    if isinstance(v, bool):
        return v
    if not mpmath.isfinite(v):
        raise _BadPoint()
    return v


_FUNCTIONS = {
    "sqrt": mpmath.sqrt,
    "Abs": abs,
    "abs": abs,
    "exp": mpmath.exp,
    "ln": mpmath.log,
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "tan": mpmath.tan,
    "asin": mpmath.asin,
    "acos": mpmath.acos,
    "atan": mpmath.atan,
    "sinh": mpmath.sinh,
    "cosh": mpmath.cosh,
    "tanh": mpmath.tanh,
    "floor": mpmath.floor,
    "ceiling": mpmath.ceil,
    "ceil": mpmath.ceil,
}


def _eval(node: Node, env: dict):
    if isinstance(node, Num):
        return _to_mp(node.value)
    if isinstance(node, Sym):
        if node.name in env:
            return env[node.name]
        if node.name == "pi":
            return +mpmath.pi
        if node.name == "E":
            return mpmath.e
        if node.name == "I":
            return mpmath.mpc(0, 1)
        if node.name == "oo":
            raise _BadPoint()  # infinite value: no finite comparison
        if node.name in ("True", "False"):
            return node.name == "True"
        raise _Unsupported(f"unbound symbol {node.name!r}")
    if isinstance(node, Unary):
        v = _as_number(_eval(node.operand, env))
        return _check_finite(-v if node.op == "-" else v)
    if isinstance(node, Binary):
        return _eval_binary(node, env)
    if isinstance(node, Call):
        return _eval_call(node, env)
    if isinstance(node, Aggregate):
        raise _Unsupported("collection inside arithmetic")
    raise _Unsupported(f"node {node!r}")


def _eval_binary(node: Binary, env: dict):
    op = node.op
    if op in ("|", "&"):
        lv = _eval(node.left, env)
        rv = _eval(node.right, env)
        if not (isinstance(lv, bool) and isinstance(rv, bool)):
            raise _Unsupported("logical operator over non-boolean operands")
        return (lv or rv) if op == "|" else (lv and rv)
    lv = _as_number(_eval(node.left, env))
    rv = _as_number(_eval(node.right, env))
    if op in ("<", "<=", ">", ">="):
        lr, rr = _real(lv), _real(rv)
        if op == "<":
            return bool(lr < rr)
        if op == "<=":
            return bool(lr <= rr)
        if op == ">":
            return bool(lr > rr)
        return bool(lr >= rr)
    try:
        if op == "+":
            out = lv + rv
        elif op == "-":
            out = lv - rv
        elif op == "*":
            out = lv * rv
        elif op == "/":
            out = lv / rv
        elif op == "**":
            out = mpmath.power(lv, rv)
        else:
            raise _Unsupported(f"operator {op!r}")
    except (ZeroDivisionError, OverflowError, ValueError):
        raise _BadPoint() from None
    return _check_finite(out)


def _eval_call(node: Call, env: dict):
    fn = _FUNCTIONS.get(node.name)
    if fn is not None and len(node.args) == 1:
        arg = _as_number(_eval(node.args[0], env))
        try:
            return _check_finite(fn(arg))
        except (ZeroDivisionError, OverflowError, ValueError):
            raise _BadPoint() from None
    if node.name == "log":
        args = [_as_number(_eval(a, env)) for a in node.args]
        try:
            if len(args) == 1:
                return _check_finite(mpmath.log(args[0]))
            if len(args) == 2:
                return _check_finite(mpmath.log(args[0]) / mpmath.log(args[1]))
        except (ZeroDivisionError, OverflowError, ValueError):
            raise _BadPoint() from None
    if node.name in ("Min", "Max", "min", "max") and node.args:
        values = [_real(_as_number(_eval(a, env))) for a in node.args]
        return max(values) if node.name.lower() == "max" else min(values)
    raise _Unsupported(f"function {node.name!r}")
