"""Prompt templates for the four agent roles.

Templates are data: each has a body with ``{name}`` placeholders and a
manifest of required placeholders. Literal braces that are not a known
placeholder (``\\boxed{}``) pass through untouched. Bodies can be
overridden per role from the pipeline config.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass


class MissingPlaceholder(KeyError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str
    required: frozenset[str]


_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z_0-9]*)\}")


def render_prompt(template: PromptTemplate, bindings: dict[str, str]) -> str:
    """Exact substitution of the bound placeholders; math content is not escaped."""
    missing = template.required - bindings.keys()
    if missing:
        raise MissingPlaceholder(
            f"template {template.name!r} is missing bindings for {sorted(missing)}"
        )

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key in bindings:
            return str(bindings[key])
        return match.group(0)

    return _PLACEHOLDER_RE.sub(substitute, template.body)


SOLVER_SYSTEM = PromptTemplate(
    "solver_system",
    """You are a helpful assistant that solves math problems using the given tools.

You should reflect on your execution result, refine your plan, and output the next action.

Not all occasions need to use tools; it depends on the nature of the problem.

IMPORTANT: When using mathematical expressions, use SymPy grammar. For example:
  - Use ** for exponents (e.g., x**2 for x²)
  - Use sqrt() for square roots
  - Use pi for Pi
  - Use * for multiplication (e.g., 2*x not 2x, x*y not xy)
  - Use solve() for solving equations
  - Use Abs() for absolute values, do not use |.| (e.g., Abs(-4) not |-4|)
  - Use Sum (capitalized) to represent summation over a series (e.g., Sum(ceil(log(i, 2)), (i, 2, 1000)))
  - Use capital I for imaginary numbers
  - Each variable must be a single letter (e.g., replace lambda with l)
  - Always convert angles to radians, not degrees
  - Use . between vectors as inner product (e.g., (u + v) . (2*u - v))
  - Use Matrix to represent coordinates, not tuples
  - All string input must conform to sympy.parse format
  - For coordinates, do not write P(x,y,z); instead, use (x, y, z)

  For equations:
    * NEVER use = in expressions
    * Use Eq(left_side, right_side) (e.g., Eq(y, (-80 - 320*i)/x))
    * Alternatively, rearrange to expression = 0 form

If you obtain the final answer, provide it in LaTeX wrapped in \\boxed{}.
Only reply in LaTeX and analytic solution.

**NEVER** write the code block explicitly.""",
    frozenset(),
)

PLANNING = PromptTemplate(
    "planning",
    """Read the following question and provide a high-level, step-by-step plan for this problem, including the tools you will use.
For each tool, explain why you are using it and what you expect it to return.
Keep the plan high-level and concise.

Question: {question}""",
    frozenset({"question"}),
)

STEP = PromptTemplate(
    "step",
    """Execute the next step of the plan.
You should reflect on the execution result, refine your plan, and output the next action.
Not all steps require a tool call - decide based on the current state and available tools (e.g., SymPy).""",
    frozenset(),
)

TRANSLATOR = PromptTemplate(
    "translator",
    """You are a mathematical problem solver. Your task is to solve the following problem step by step. Clearly illustrate the reasoning process and show all calculations explicitly.

Problem: {tool_name}
This problem {docstring}.
Here is the input required for solving this problem: {arguments}

Your final answer should be wrapped in \\boxed{}.
Do **not** generate code.""",
    frozenset({"tool_name", "docstring", "arguments"}),
)

JUDGE = PromptTemplate(
    "judge",
    """You are a mathematical verifier.
Your task is to verify whether the following generated answer is mathematically equivalent to the ground truth.
Ignore the format of the answer.

Ground Truth: {ground_truth}.

Generated Answer: {final_answer}.

First explain why (or why not) the generated answer is mathematically equivalent to the ground truth.
Then clearly state True or False at the end, wrapped in \\boxed{}.""",
    frozenset({"ground_truth", "final_answer"}),
)

REPHRASE = PromptTemplate(
    "rephrase",
    """You are a mathematical answer reformatter.
Your task is to reformat the given message in a clear manner.

You will receive a reasoning path with plans and execution steps. The execution steps include reasoning based on natural language and tool function calls. Remember, do NOT mention using SymPy or code in the explanation.

Your rewritten message should read like a single, flowing mathematical solution where each step naturally builds upon previous work.

{trace}""",
    frozenset({"trace"}),
)

_DEFAULTS = {t.name: t for t in (SOLVER_SYSTEM, PLANNING, STEP, TRANSLATOR, JUDGE, REPHRASE)}


def default_templates() -> dict[str, PromptTemplate]:
    return dict(_DEFAULTS)


def load_templates(overrides: dict[str, str] | str | None = None) -> dict[str, PromptTemplate]:
    """Default templates, with per-name body overrides from a mapping or a
    JSON file ``{"templates": {name: body}}``.

    An override body must still contain every required placeholder.
    """
    templates = default_templates()
    if overrides is None:
        return templates
    if isinstance(overrides, str):
        with open(overrides, encoding="utf-8") as fh:
            overrides = json.load(fh).get("templates", {})
    for name, body in overrides.items():
        if name not in templates:
            raise KeyError(f"unknown template {name!r}")
        required = templates[name].required
        present = set(_PLACEHOLDER_RE.findall(body))
        missing = required - present
        if missing:
            raise MissingPlaceholder(
                f"override for {name!r} drops required placeholders {sorted(missing)}"
            )
        templates[name] = PromptTemplate(name, body, required)
    return templates
