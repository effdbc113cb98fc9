"""SymPy-backed toolkit: 26 tool wrappers with stable JSON envelopes.

Every wrapper returns a JSON string. Success bodies are either
``{"result": ...}`` or ``{"status": "success", "result": ...}`` depending
on the tool (callers rely on the exact shape per tool); every failure is
``{"status": "error", "message": ...}``. Wrappers never raise.
"""

from __future__ import annotations

import json
import logging
from typing import List, Optional

logger = logging.getLogger("symbolic_executor")


class SymPyToolkit:
    """One instance per worker process; stateless apart from the default
    variable used when a tool's ``variable`` argument is omitted."""

    default_variable = "x"

    def simplify_expression(self, expression: str) -> str:
        """Simplifies a mathematical expression."""
        import sympy as sp

        try:
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            simplified = sp.simplify(expr)
            return json.dumps(
                {"status": "success", "result": str(simplified)},
                ensure_ascii=False,
            )
        except Exception as e:
            return self.handle_exception("simplify_expression", e)

    def expand_expression(self, expression: str) -> str:
        """Expands an algebraic expression."""
        import sympy as sp

        try:
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            expanded_expr = sp.expand(expr)
            return json.dumps({"result": str(expanded_expr)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("expand_expression", e)

    def factor_expression(self, expression: str) -> str:
        """Factors an algebraic expression."""
        import sympy as sp

        try:
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            factored_expr = sp.factor(expr)
            return json.dumps({"result": str(factored_expr)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("factor_expression", e)

    def solve_linear_system(self, equations: List[str], variables: List[str]) -> str:
        """Solves a system of linear equations."""
        import sympy as sp

        try:
            eqs = [sp.sympify(eq) for eq in equations]
            vars = sp.symbols(variables)
            solution = sp.linsolve(eqs, vars)
            return json.dumps(
                {"result": [str(sol) for sol in solution]}, ensure_ascii=False
            )
        except Exception as e:
            return self.handle_exception("solve_linear_system", e)

    def solve_nonlinear_system(self, sympy_equations: List[str], variables: List[str]) -> str:
        """Solves a system of nonlinear equations."""
        import sympy as sp

        try:
            eqs = [sp.sympify(eq) for eq in sympy_equations]
            vars = sp.symbols(variables)
            solution = sp.nonlinsolve(eqs, vars)
            return json.dumps(
                {"result": [str(sol) for sol in solution]}, ensure_ascii=False
            )
        except Exception as e:
            return self.handle_exception("solve_nonlinear_system", e)

    def solve_univariate_inequality(self, inequality: str, variable: str) -> str:
        """Solves a single-variable inequality."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            ineq = sp.sympify(inequality)
            solution = sp.solve_univariate_inequality(ineq, var)
            return json.dumps({"result": str(solution)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("solve_univariate_inequality", e)

    def reduce_inequalities(self, inequalities: List[str]) -> str:
        """Reduces a system of inequalities."""
        import sympy as sp

        try:
            ineqs = [sp.sympify(ineq) for ineq in inequalities]
            solution = sp.reduce_inequalities(ineqs)
            return json.dumps({"result": str(solution)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("reduce_inequalities", e)

    def polynomial_representation(self, expression: str, variable: str) -> str:
        """Represents an expression as a polynomial."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            poly = sp.Poly(expr, var)
            return json.dumps({"result": str(poly)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("polynomial_representation", e)

    def polynomial_degree(self, expression: str, variable: str) -> str:
        """Returns the degree of a polynomial."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            degree = int(sp.degree(expr, var))
            return json.dumps({"result": degree}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("polynomial_degree", e)

    def polynomial_coefficients(self, expression: str, variable: str) -> str:
        """Returns the coefficients of a polynomial, ordered from the
        highest degree term to the constant term."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            coeffs = sp.Poly(expr, var).all_coeffs()
            return json.dumps(
                {"result": [str(coeff) for coeff in coeffs]}, ensure_ascii=False
            )
        except Exception as e:
            return self.handle_exception("polynomial_coefficients", e)

    def solve_equation(self, sympy_equation: str, variable: Optional[str] = None) -> str:
        """Solves an equation for a specific variable; without an explicit
        variable the default variable is used."""
        import sympy as sp

        try:
            variable = (
                sp.symbols(variable) if variable else sp.symbols(self.default_variable)
            )
            eq = sp.sympify(sympy_equation)
            solutions = sp.solve(eq, variable)
            return json.dumps(
                {"result": [str(sol) for sol in solutions]}, ensure_ascii=False
            )
        except Exception as e:
            return self.handle_exception("solve_equation", e)

    def find_roots(self, expression: str) -> str:
        """Finds the roots of a polynomial or algebraic equation."""
        import sympy as sp

        try:
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            roots = sp.solve(expr)
            return json.dumps(
                {"status": "success", "result": str(roots)}, ensure_ascii=False
            )
        except Exception as e:
            return self.handle_exception("find_roots", e)

    def differentiate(self, expression: str, variable: Optional[str] = None) -> str:
        """Differentiates an expression with respect to a variable."""
        import sympy as sp

        try:
            variable = (
                sp.symbols(variable) if variable else sp.symbols(self.default_variable)
            )
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            derivative = sp.diff(expr, variable)
            return json.dumps({"result": str(derivative)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("differentiate", e)

    def integrate(self, expression: str, variable: Optional[str] = None) -> str:
        """Integrates an expression with respect to a variable."""
        import sympy as sp

        try:
            variable = (
                sp.symbols(variable) if variable else sp.symbols(self.default_variable)
            )
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            integral = sp.integrate(expr, variable)
            return json.dumps({"result": str(integral)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("integrate", e)

    def definite_integral(self, expression: str, variable: str, lower: float, upper: float) -> str:
        """Computes the definite integral of an expression within given bounds."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            integral = sp.integrate(expr, (var, lower, upper))
            return json.dumps({"result": str(integral)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("definite_integral", e)

    def series_expansion(self, expression: str, variable: str, point: float, order: int) -> str:
        """Expands an expression into a Taylor series around a given point up
        to a specified order."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            series = sp.series(expr, var, point, order)
            return json.dumps({"result": str(series)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("series_expansion", e)

    def compute_limit(self, expression: str, variable: str, point: float) -> str:
        """Computes the limit of an expression as a variable approaches a point."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            limit = sp.limit(expr, var, point)
            return json.dumps({"result": str(limit)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("compute_limit", e)

    def find_critical_points(self, expression: str, variable: str) -> str:
        """Finds the critical points of an expression by setting its
        derivative to zero."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            derivative = sp.diff(expr, var)
            critical_points = sp.solve(derivative, var)
            return json.dumps(
                {"result": [str(point) for point in critical_points]},
                ensure_ascii=False,
            )
        except Exception as e:
            return self.handle_exception("find_critical_points", e)

    def check_continuity(self, expression: str, variable: str, point: float) -> str:
        """Checks if an expression is continuous at a given point by comparing
        the one-sided limits with the value."""
        import sympy as sp

        try:
            var = sp.symbols(variable)
            expr = sp.parsing.sympy_parser.parse_expr(expression)
            left_limit = sp.limit(expr, var, point, dir='-')
            right_limit = sp.limit(expr, var, point, dir='+')
            value_at_point = expr.subs(var, point)
            is_continuous = left_limit == right_limit == value_at_point
            return json.dumps({"result": str(is_continuous)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("check_continuity", e)

    def compute_determinant(self, matrix: List[List[float]]) -> str:
        """Computes the determinant of a matrix."""
        import sympy as sp

        try:
            mat = sp.Matrix(matrix)
            determinant = mat.det()
            return json.dumps({"result": str(determinant)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("compute_determinant", e)

    def compute_inverse(self, matrix: List[List[float]]) -> str:
        """Computes the inverse of a matrix."""
        import sympy as sp

        try:
            mat = sp.Matrix(matrix)
            inverse = mat.inv()
            return json.dumps({"result": str(inverse)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("compute_inverse", e)

    def compute_eigenvalues(self, matrix: List[List[float]]) -> str:
        """Computes the eigenvalues of a matrix, mapped to their multiplicities."""
        import sympy as sp

        try:
            mat = sp.Matrix(matrix)
            eigenvalues = mat.eigenvals()
            return json.dumps(
                {"result": {str(k): str(v) for k, v in eigenvalues.items()}},
                ensure_ascii=False,
            )
        except Exception as e:
            return self.handle_exception("compute_eigenvalues", e)

    def compute_eigenvectors(self, matrix: List[List[float]]) -> str:
        """Computes the eigenvectors of a matrix as
        eigenvalue/multiplicity/eigenvectors records."""
        import sympy as sp

        try:
            mat = sp.Matrix(matrix)
            eigenvectors = mat.eigenvects()
            result = [
                {
                    "eigenvalue": str(eigenvalue),
                    "multiplicity": multiplicity,
                    "eigenvectors": [str(v) for v in vectors],
                }
                for eigenvalue, multiplicity, vectors in eigenvectors
            ]
            return json.dumps({"result": result}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("compute_eigenvectors", e)

    def compute_nullspace(self, matrix: List[List[float]]) -> str:
        """Computes the null space of a matrix as a list of basis vectors."""
        import sympy as sp

        try:
            mat = sp.Matrix(matrix)
            nullspace = mat.nullspace()
            return json.dumps(
                {"result": [str(vec) for vec in nullspace]}, ensure_ascii=False
            )
        except Exception as e:
            return self.handle_exception("compute_nullspace", e)

    def compute_rank(self, matrix: List[List[float]]) -> str:
        """Computes the rank of a matrix."""
        import sympy as sp

        try:
            mat = sp.Matrix(matrix)
            rank = mat.rank()
            return json.dumps({"result": rank}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("compute_rank", e)

    def compute_inner_product(self, vector1: List[float], vector2: List[float]) -> str:
        """Computes the inner (dot) product of two vectors.

        Raises ValueError (enveloped) if the vectors have different
        dimensions.
        """
        import sympy as sp

        try:
            v1 = sp.Matrix(vector1)
            v2 = sp.Matrix(vector2)
            if v1.shape != v2.shape:
                raise ValueError(
                    "Vectors must have the same dimensions to compute "
                    "the inner product."
                )
            inner_product = v1.dot(v2)
            return json.dumps({"result": str(inner_product)}, ensure_ascii=False)
        except Exception as e:
            return self.handle_exception("compute_inner_product", e)

    def handle_exception(self, func_name: str, error: Exception) -> str:
        """Logs the failure and returns the error envelope."""
        logger.error("Error in %s: %s", func_name, error)
        return json.dumps(
            {"status": "error", "message": f"Error in {func_name}: {error}"},
            ensure_ascii=False,
        )


TOOL_NAMES = (
    "simplify_expression",
    "expand_expression",
    "factor_expression",
    "solve_equation",
    "solve_linear_system",
    "solve_nonlinear_system",
    "find_roots",
    "solve_univariate_inequality",
    "reduce_inequalities",
    "polynomial_representation",
    "polynomial_degree",
    "polynomial_coefficients",
    "differentiate",
    "integrate",
    "definite_integral",
    "series_expansion",
    "compute_limit",
    "find_critical_points",
    "check_continuity",
    "compute_determinant",
    "compute_inverse",
    "compute_eigenvalues",
    "compute_eigenvectors",
    "compute_nullspace",
    "compute_rank",
    "compute_inner_product",
)

# success envelope shape per tool: callers match on these exactly
ENVELOPE_SHAPES = {
    "simplify_expression": "status+str",
    "find_roots": "status+str",
    "expand_expression": "str",
    "factor_expression": "str",
    "solve_univariate_inequality": "str",
    "reduce_inequalities": "str",
    "polynomial_representation": "str",
    "differentiate": "str",
    "integrate": "str",
    "definite_integral": "str",
    "series_expansion": "str",
    "compute_limit": "str",
    "check_continuity": "str",
    "compute_determinant": "str",
    "compute_inverse": "str",
    "compute_inner_product": "str",
    "solve_equation": "list[str]",
    "solve_linear_system": "list[str]",
    "solve_nonlinear_system": "list[str]",
    "polynomial_coefficients": "list[str]",
    "find_critical_points": "list[str]",
    "compute_nullspace": "list[str]",
    "polynomial_degree": "int",
    "compute_rank": "int",
    "compute_eigenvalues": "dict[str,str]",
    "compute_eigenvectors": "eigenvector-records",
}


def dispatch(toolkit: SymPyToolkit, tool: str, args: dict) -> str:
    """Route one call; any failure (unknown tool, bad keywords, tool error)
    comes back as an error envelope, never an exception."""
    if tool not in TOOL_NAMES:
        return toolkit.handle_exception("dispatch", ValueError(f"unknown tool {tool!r}"))
    method = getattr(toolkit, tool)
    try:
        if not isinstance(args, dict):
            raise TypeError("arguments must be an object")
        return method(**args)
    except Exception as e:
        return toolkit.handle_exception(tool, e)
