"""Two-phase solve loop: plan first, then step-wise execution with tool use.

Each assistant turn in the execution loop is one step; the loop stops at a
boxed final answer or at the step cap. Tool calls inside a turn are
validated, dispatched through the executor bridge under the retry budget,
and their results (including failures) are fed back to the model as tool
messages so the next step can repair course.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import prompts
from .bridge import BudgetExhausted, CallBudget
from .expr import UnbalancedBraces, equivalence_check, extract_boxed
from .gateway import ChatMessage, Gateway, tool_result, user
from .registry import MissingTool, Registry, ValidationError, to_function_schemas, validate_arguments
from .traces import (
    CORRECT,
    INCORRECT,
    MAX_STEPS,
    UNVERIFIED,
    MessageSegment,
    Problem,
    TIRTrace,
    ToolInvocation,
)


def local_verdict(ground_truth: str, answer: str) -> str:
    """Verdict from the local equivalence checker alone."""
    verdict = equivalence_check(ground_truth, answer)
    if verdict.outcome == "equivalent":
        return CORRECT
    if verdict.outcome == "different":
        return INCORRECT
    return UNVERIFIED


@dataclass
class _RunState:
    conversation: list[ChatMessage]
    segments: list = field(default_factory=list)
    steps: int = 0
    accounting: dict = field(default_factory=lambda: {"llm_calls": 0, "tool_calls": 0, "tool_failures": 0})


class SolverAgent:
    """Drives one problem at a time; instances are cheap, shared components
    (gateway, bridge, registry) must tolerate concurrent use."""

    def __init__(
        self,
        gateway: Gateway,
        bridge,
        registry: Registry,
        templates: dict | None = None,
        max_steps: int = MAX_STEPS,
        budget: CallBudget = CallBudget(),
        verifier=None,
        seed: int | None = None,
    ):
        self.gateway = gateway
        self.bridge = bridge
        self.registry = registry
        self.templates = templates or prompts.default_templates()
        self.max_steps = max_steps
        self.budget = budget
        self.verifier = verifier or local_verdict
        self.seed = seed
        self._schemas = to_function_schemas(registry)

    # --- planning phase ---

    def plan(self, problem: Problem, state: _RunState) -> str:
        """One assistant turn with tools withheld; a turn that tries to call
        tools anyway is re-asked once, then accepted as plain text."""
        reply = self._complete(state, tools=None)
        if reply.tool_calls:
            reply = self._complete(state, tools=None)
        plan_text = reply.content
        state.conversation.append(ChatMessage("assistant", plan_text))
        return plan_text

    # --- execution phase ---

    def execute_step(self, state: _RunState) -> tuple[str, str | None]:
        """Run one step; returns ("continue", None), ("finished", answer),
        or ("exhausted", None) once the step cap is hit."""
        if state.steps >= self.max_steps:
            return "exhausted", None
        state.conversation.append(user(prompts.render_prompt(self.templates["step"], {})))
        reply = self._complete(state, tools=self._schemas)
        state.steps += 1
        state.conversation.append(reply)
        if reply.content.strip():
            state.segments.append(MessageSegment(reply.content))
        for call in reply.tool_calls:
            invocation = self._run_tool_call(call)
            state.segments.append(invocation)
            state.accounting["tool_calls"] += 1
            if not invocation.ok:
                state.accounting["tool_failures"] += 1
            state.conversation.append(tool_result(call.call_id, invocation.result_text()))
        try:
            answer = extract_boxed(reply.content)
        except UnbalancedBraces:
            answer = None
        if answer and answer.strip():
            return "finished", answer.strip()
        return "continue", None

    def _run_tool_call(self, call) -> ToolInvocation:
        try:
            raw_args = call.parsed_arguments()
        except ValueError as exc:
            return ToolInvocation(call.name, call.arguments, "", False, 1,
                                  message=f"arguments are not a JSON object: {exc}")
        try:
            descriptor = self.registry.get(call.name)
        except MissingTool as exc:
            return ToolInvocation(call.name, call.arguments, "", False, 1,
                                  message=f"MissingTool: {exc}")
        try:
            validated = validate_arguments(descriptor, raw_args)
        except ValidationError as exc:
            return ToolInvocation(call.name, call.arguments, "", False, 1,
                                  message=f"{type(exc).__name__}: {exc}")
        try:
            response = self.bridge.call_tool(call.name, validated, self.budget)
        except BudgetExhausted as exc:
            response = exc.response
        return ToolInvocation(
            tool=call.name,
            arguments=call.arguments,
            payload=response.payload,
            ok=response.ok,
            attempts=response.attempts,
            elapsed_ms=response.elapsed_ms,
            message=response.message,
        )

    # --- full solve ---

    def solve(self, problem: Problem) -> TIRTrace:
        state = _RunState(
            conversation=[
                ChatMessage("system", prompts.render_prompt(self.templates["solver_system"], {})),
                user(prompts.render_prompt(self.templates["planning"], {"question": problem.question})),
            ]
        )
        plan_text = self.plan(problem, state)
        final_answer: str | None = None
        while True:
            outcome, answer = self.execute_step(state)
            if outcome == "finished":
                final_answer = answer
                break
            if outcome == "exhausted":
                break
        if final_answer is not None and problem.answer:
            verdict = self.verifier(problem.answer, final_answer)
        else:
            verdict = UNVERIFIED
        return TIRTrace(
            problem_id=problem.problem_id,
            plan=plan_text,
            segments=state.segments,
            final_answer=final_answer,
            step_count=state.steps,
            verdict=verdict,
            accounting=state.accounting,
        )

    def _complete(self, state: _RunState, tools) -> ChatMessage:
        state.accounting["llm_calls"] += 1
        return self.gateway.complete_chat(state.conversation, tools=tools, seed=self.seed)


def solve(problem: Problem, gateway: Gateway, bridge, registry: Registry, **kwargs) -> TIRTrace:
    """Convenience wrapper: one agent instance per problem."""
    return SolverAgent(gateway, bridge, registry, **kwargs).solve(problem)
