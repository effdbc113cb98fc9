"""Catalog of the symbolic toolkit: descriptors, function-calling schemas,
and argument validation against the expression dialect."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

from .expr import ParseError, ReservedConstructError, Sym, parse_expression

CATEGORIES = (
    "Algebraic Simplification",
    "Equation Solving",
    "Inequalities",
    "Polynomial Analysis",
    "Calculus",
    "Critical Point Analysis",
    "Linear Algebra",
)

PARAM_KINDS = ("string", "string-list", "number", "number-list", "number-matrix", "integer")


class CatalogError(ValueError):
    """Malformed tool catalog (duplicate name, unknown category, empty)."""


class ValidationError(ValueError):
    """Base class for argument-validation failures."""


class MissingTool(ValidationError):
    pass


class MissingParam(ValidationError):
    pass


class DialectViolation(ValidationError):
    """A string argument breaks the expression dialect (e.g. a bare ``=``)."""


class ExtraParamWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    required: bool = True
    # "expression" strings must parse in the dialect; "identifier" strings
    # must be a single symbol; None skips dialect checks
    content: str | None = None


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    category: str
    description: str
    params: tuple[ParamSpec, ...]
    returns: str


@dataclass(frozen=True)
class FunctionSchema:
    name: str
    description: str
    parameters: dict

    def as_payload(self) -> dict:
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": self.parameters,
            },
        }


def _p(name: str, kind: str = "string", required: bool = True, content: str | None = None) -> ParamSpec:
    return ParamSpec(name, kind, required, content)


_EXPR = "expression"
_IDENT = "identifier"

_CATALOG: tuple[ToolDescriptor, ...] = (
    ToolDescriptor(
        "simplify_expression", "Algebraic Simplification",
        "Simplifies a mathematical expression.",
        (_p("expression", content=_EXPR),),
        "simplified expression text",
    ),
    ToolDescriptor(
        "expand_expression", "Algebraic Simplification",
        "Expands an algebraic expression.",
        (_p("expression", content=_EXPR),),
        "expanded expression text",
    ),
    ToolDescriptor(
        "factor_expression", "Algebraic Simplification",
        "Factors an algebraic expression.",
        (_p("expression", content=_EXPR),),
        "factored expression text",
    ),
    ToolDescriptor(
        "solve_equation", "Equation Solving",
        "Solves an equation for a specific variable.",
        (_p("sympy_equation", content=_EXPR), _p("variable", required=False, content=_IDENT)),
        "list of solution strings",
    ),
    ToolDescriptor(
        "solve_linear_system", "Equation Solving",
        "Solves a system of linear equations.",
        (_p("equations", "string-list", content=_EXPR), _p("variables", "string-list", content=_IDENT)),
        "list of solution tuples",
    ),
    ToolDescriptor(
        "solve_nonlinear_system", "Equation Solving",
        "Solves a system of nonlinear equations.",
        (_p("sympy_equations", "string-list", content=_EXPR), _p("variables", "string-list", content=_IDENT)),
        "list of solution tuples",
    ),
    ToolDescriptor(
        "find_roots", "Equation Solving",
        "Finds the roots of a polynomial or algebraic equation.",
        (_p("expression", content=_EXPR),),
        "list of roots",
    ),
    ToolDescriptor(
        "solve_univariate_inequality", "Inequalities",
        "Solves a single-variable inequality.",
        (_p("inequality", content=_EXPR), _p("variable", content=_IDENT)),
        "solution in interval/relational form",
    ),
    ToolDescriptor(
        "reduce_inequalities", "Inequalities",
        "Reduces a system of inequalities.",
        (_p("inequalities", "string-list", content=_EXPR),),
        "reduced system in relational form",
    ),
    ToolDescriptor(
        "polynomial_representation", "Polynomial Analysis",
        "Represents an expression as a polynomial.",
        (_p("expression", content=_EXPR), _p("variable", content=_IDENT)),
        "polynomial form text",
    ),
    ToolDescriptor(
        "polynomial_degree", "Polynomial Analysis",
        "Returns the degree of a polynomial.",
        (_p("expression", content=_EXPR), _p("variable", content=_IDENT)),
        "integer degree",
    ),
    ToolDescriptor(
        "polynomial_coefficients", "Polynomial Analysis",
        "Returns the coefficients of a polynomial.",
        (_p("expression", content=_EXPR), _p("variable", content=_IDENT)),
        "coefficients from highest degree to constant",
    ),
    ToolDescriptor(
        "differentiate", "Calculus",
        "Differentiates an expression with respect to a variable.",
        (_p("expression", content=_EXPR), _p("variable", required=False, content=_IDENT)),
        "derivative text",
    ),
    ToolDescriptor(
        "integrate", "Calculus",
        "Integrates an expression with respect to a variable.",
        (_p("expression", content=_EXPR), _p("variable", required=False, content=_IDENT)),
        "antiderivative text",
    ),
    ToolDescriptor(
        "definite_integral", "Calculus",
        "Computes the definite integral of an expression within given bounds.",
        (
            _p("expression", content=_EXPR),
            _p("variable", content=_IDENT),
            _p("lower", "number"),
            _p("upper", "number"),
        ),
        "integral value text",
    ),
    ToolDescriptor(
        "series_expansion", "Calculus",
        "Expands an expression into a Taylor series around a given point up to a specified order.",
        (
            _p("expression", content=_EXPR),
            _p("variable", content=_IDENT),
            _p("point", "number"),
            _p("order", "integer"),
        ),
        "series text with order term",
    ),
    ToolDescriptor(
        "compute_limit", "Calculus",
        "Computes the limit of an expression as a variable approaches a point.",
        (_p("expression", content=_EXPR), _p("variable", content=_IDENT), _p("point", "number")),
        "limit value text",
    ),
    ToolDescriptor(
        "find_critical_points", "Critical Point Analysis",
        "Finds the critical points of an expression by setting its derivative to zero.",
        (_p("expression", content=_EXPR), _p("variable", content=_IDENT)),
        "list of critical points",
    ),
    ToolDescriptor(
        "check_continuity", "Critical Point Analysis",
        "Checks if an expression is continuous at a given point.",
        (_p("expression", content=_EXPR), _p("variable", content=_IDENT), _p("point", "number")),
        "True or False",
    ),
    ToolDescriptor(
        "compute_determinant", "Linear Algebra",
        "Computes the determinant of a matrix.",
        (_p("matrix", "number-matrix"),),
        "determinant text",
    ),
    ToolDescriptor(
        "compute_inverse", "Linear Algebra",
        "Computes the inverse of a matrix.",
        (_p("matrix", "number-matrix"),),
        "inverse matrix text",
    ),
    ToolDescriptor(
        "compute_eigenvalues", "Linear Algebra",
        "Computes the eigenvalues of a matrix.",
        (_p("matrix", "number-matrix"),),
        "map of eigenvalue to multiplicity",
    ),
    ToolDescriptor(
        "compute_eigenvectors", "Linear Algebra",
        "Computes the eigenvectors of a matrix.",
        (_p("matrix", "number-matrix"),),
        "eigenvalue/multiplicity/eigenvector records",
    ),
    ToolDescriptor(
        "compute_nullspace", "Linear Algebra",
        "Computes the null space of a matrix.",
        (_p("matrix", "number-matrix"),),
        "list of basis vectors",
    ),
    ToolDescriptor(
        "compute_rank", "Linear Algebra",
        "Computes the rank of a matrix.",
        (_p("matrix", "number-matrix"),),
        "integer rank",
    ),
    ToolDescriptor(
        "compute_inner_product", "Linear Algebra",
        "Computes the inner (dot) product of two vectors.",
        (_p("vector1", "number-list"), _p("vector2", "number-list")),
        "inner product text",
    ),
)


class Registry:
    """Immutable view over the tool catalog."""

    def __init__(self, descriptors: tuple[ToolDescriptor, ...]):
        self._descriptors = descriptors
        self._by_name = {d.name: d for d in descriptors}

    def __len__(self) -> int:
        return len(self._descriptors)

    def __iter__(self):
        return iter(self._descriptors)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def get(self, name: str) -> ToolDescriptor:
        try:
            return self._by_name[name]
        except KeyError:
            raise MissingTool(f"unknown tool {name!r}") from None

    def names(self) -> list[str]:
        return [d.name for d in self._descriptors]

    def category_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for d in self._descriptors:
            counts[d.category] = counts.get(d.category, 0) + 1
        return counts


def load_registry(source: str | None = None) -> Registry:
    """Build the registry from the embedded catalog or a JSON override file."""
    if source is None:
        descriptors = _CATALOG
    else:
        with open(source, encoding="utf-8") as fh:
            raw = json.load(fh)
        tools = raw.get("tools")
        if not tools:
            raise CatalogError(f"catalog override {source!r} defines no tools")
        descriptors = tuple(_descriptor_from_dict(entry) for entry in tools)
    seen: set[str] = set()
    for d in descriptors:
        if d.name in seen:
            raise CatalogError(f"duplicate tool name {d.name!r}")
        seen.add(d.name)
        if d.category not in CATEGORIES:
            raise CatalogError(f"unknown category {d.category!r} for tool {d.name!r}")
    if not descriptors:
        raise CatalogError("empty catalog")
    return Registry(descriptors)


def _descriptor_from_dict(entry: dict) -> ToolDescriptor:
    try:
        params = tuple(
            ParamSpec(
                p["name"],
                p.get("kind", "string"),
                bool(p.get("required", True)),
                p.get("content"),
            )
            for p in entry.get("params", [])
        )
        for p in params:
            if p.kind not in PARAM_KINDS:
                raise CatalogError(f"unknown param kind {p.kind!r}")
        return ToolDescriptor(
            entry["name"],
            entry["category"],
            entry.get("description", ""),
            params,
            entry.get("returns", ""),
        )
    except KeyError as exc:
        raise CatalogError(f"catalog entry missing field {exc}") from None


_JSON_TYPES = {
    "string": {"type": "string"},
    "string-list": {"type": "array", "items": {"type": "string"}},
    "number": {"type": "number"},
    "integer": {"type": "integer"},
    "number-list": {"type": "array", "items": {"type": "number"}},
    "number-matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
}


def to_function_schemas(registry: Registry) -> list[FunctionSchema]:
    """One function-calling schema per descriptor, in catalog order."""
    schemas = []
    for d in registry:
        properties = {p.name: dict(_JSON_TYPES[p.kind]) for p in d.params}
        schemas.append(
            FunctionSchema(
                name=d.name,
                description=d.description,
                parameters={
                    "type": "object",
                    "properties": properties,
                    "required": [p.name for p in d.params if p.required],
                },
            )
        )
    return schemas


def validate_arguments(tool: ToolDescriptor, args: dict) -> dict:
    """Check a raw argument map against the descriptor; returns a normalized copy.

    Missing required params raise MissingParam; unknown params warn and are
    dropped; expression strings must parse in the dialect (a bare ``=``
    raises DialectViolation).
    """
    if not isinstance(args, dict):
        raise ValidationError(f"arguments must be an object, got {type(args).__name__}")
    known = {p.name: p for p in tool.params}
    for key in args:
        if key not in known:
            warnings.warn(
                f"tool {tool.name!r} does not take a parameter {key!r}; ignoring",
                ExtraParamWarning,
                stacklevel=2,
            )
    out: dict = {}
    for spec in tool.params:
        if spec.name not in args:
            if spec.required:
                raise MissingParam(f"tool {tool.name!r} requires parameter {spec.name!r}")
            continue
        out[spec.name] = _check_param(tool.name, spec, args[spec.name])
    return out


def _check_param(tool_name: str, spec: ParamSpec, value):
    where = f"{tool_name}.{spec.name}"
    if spec.kind == "string":
        if not isinstance(value, str):
            raise ValidationError(f"{where} must be a string")
        _check_string_content(where, spec.content, value)
        return value
    if spec.kind == "string-list":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ValidationError(f"{where} must be a list of strings")
        for v in value:
            _check_string_content(where, spec.content, v)
        return list(value)
    if spec.kind == "number":
        return _as_real(where, value)
    if spec.kind == "integer":
        if isinstance(value, bool):
            raise ValidationError(f"{where} must be an integer")
        if isinstance(value, int):
            return value
        if isinstance(value, str) and value.strip().lstrip("+-").isdigit():
            return int(value)
        raise ValidationError(f"{where} must be an integer")
    if spec.kind == "number-list":
        if not isinstance(value, list):
            raise ValidationError(f"{where} must be a list of numbers")
        return [_as_real(where, v) for v in value]
    if spec.kind == "number-matrix":
        if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
            raise ValidationError(f"{where} must be a non-empty list of rows")
        width = len(value[0])
        if width == 0 or any(len(r) != width for r in value):
            raise ValidationError(f"{where} must be rectangular")
        return [[_as_real(where, v) for v in row] for row in value]
    raise ValidationError(f"{where}: unknown kind {spec.kind!r}")


def _as_real(where: str, value):
    if isinstance(value, bool):
        raise ValidationError(f"{where} must be a number")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            return int(text)
        except ValueError:
            pass
        try:
            return float(text)
        except ValueError:
            raise ValidationError(f"{where} must be numeric, got {value!r}") from None
    raise ValidationError(f"{where} must be a number")


def _check_string_content(where: str, content: str | None, value: str) -> None:
    if content is None:
        return
    try:
        node = parse_expression(value)
    except ReservedConstructError as exc:
        raise DialectViolation(f"{where}: {exc}") from None
    except ParseError as exc:
        raise DialectViolation(f"{where}: not a valid expression: {exc}") from None
    if content == _IDENT and not isinstance(node, Sym):
        raise DialectViolation(f"{where}: expected a variable name, got {value!r}")
