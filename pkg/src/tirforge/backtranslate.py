"""Back-translation: turn correct tool-integrated traces into holistic
natural-language solutions.

Stages: filter traces by verdict; translate each successful tool call into
a standalone derivation (judged against the tool's own output, up to three
attempts); fall back to retaining the raw tool call when translation keeps
failing, rather than discarding the whole trace; finally rephrase the
assembled body into one flowing solution and lint it (boxed answer present
and equivalent, no tool markers, no tool-name leakage).
"""

from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass, field

from . import prompts
from .expr import DEFAULT_POLICY, EquivalencePolicy, UnbalancedBraces, equivalence_check, extract_boxed
from .gateway import Gateway, GatewayError, user
from .registry import Registry
from .traces import CORRECT, INCORRECT, MessageSegment, TIRTrace, ToolInvocation, UNVERIFIED

ACCEPTED = "accepted"
REJECTED = "rejected"

TRANSLATOR_MAX_ATTEMPTS = 3
RETRY_TEMPERATURE = 0.7

_MARKER_RE = re.compile(r"</?(?:tool|tool_name|args|result|cot)>")
_SYMPY_RE = re.compile(r"sympy", re.IGNORECASE)
_CODE_WORD_RE = re.compile(r"\bcode\b", re.IGNORECASE)
_TEXT_CMD_RE = re.compile(r"\\text\{([^{}]*)\}")


@dataclass(frozen=True)
class SubproblemTranslation:
    invocation_index: int
    tool: str
    arguments: str  # raw argument text of the source invocation
    prompt: str
    derivation: str
    extracted_answer: str | None
    verdict: str  # accepted | rejected
    rationale: str
    attempts: int
    accepted: bool


@dataclass
class BackTranslatedTrace:
    problem_id: str
    plan: str
    body: list  # MessageSegment | SubproblemTranslation | ToolInvocation (retained raw)
    final_answer: str | None
    translations: list = field(default_factory=list)
    tallies: dict = field(default_factory=dict)  # tool -> {"attempted": n, "accepted": n}
    holistic: str | None = None


class Verifier:
    """Answer-equivalence verdicts: local checker first, LLM judge for the
    cases the local layers cannot decide."""

    def __init__(
        self,
        judge_gateway: Gateway | None = None,
        templates: dict | None = None,
        policy: EquivalencePolicy = DEFAULT_POLICY,
    ):
        self.judge_gateway = judge_gateway
        self.templates = templates or prompts.default_templates()
        self.policy = policy

    def judge_equivalence(self, ground_truth: str, candidate: str) -> tuple[bool, str]:
        """Accept/reject with a rationale. Local Unknown escalates to the
        judge; an unparseable judge reply is re-asked once, then rejected."""
        local = equivalence_check(ground_truth, candidate, self.policy)
        if local.outcome == "equivalent":
            return True, f"local {local.method}: {local.note}"
        if local.outcome == "different":
            return False, f"local {local.method}: {local.note}"
        if self.judge_gateway is None:
            return False, f"local check abstained ({local.note}); no judge configured"
        prompt = prompts.render_prompt(
            self.templates["judge"],
            {"ground_truth": ground_truth, "final_answer": candidate},
        )
        for _ in range(2):
            reply = self.judge_gateway.complete_chat([user(prompt)])
            parsed = _parse_judge_flag(reply.content)
            if parsed is not None:
                return parsed, f"llm-judge: {reply.content.strip()[:300]}"
        return False, "judge unparseable"

    def verdict_for(self, ground_truth: str, answer: str) -> str:
        """Trace verdict (correct/incorrect/unverified) for the solver."""
        local = equivalence_check(ground_truth, answer, self.policy)
        if local.outcome == "equivalent":
            return CORRECT
        if local.outcome == "different":
            return INCORRECT
        if self.judge_gateway is None:
            return UNVERIFIED
        prompt = prompts.render_prompt(
            self.templates["judge"],
            {"ground_truth": ground_truth, "final_answer": answer},
        )
        for _ in range(2):
            reply = self.judge_gateway.complete_chat([user(prompt)])
            parsed = _parse_judge_flag(reply.content)
            if parsed is not None:
                return CORRECT if parsed else INCORRECT
        return UNVERIFIED


def _parse_judge_flag(reply_text: str) -> bool | None:
    try:
        boxed = extract_boxed(reply_text)
    except UnbalancedBraces:
        return None
    if boxed is None:
        return None
    word = _TEXT_CMD_RE.sub(r"\1", boxed).strip().strip(".").lower()
    if word == "true":
        return True
    if word == "false":
        return False
    return None


def filter_traces(traces) -> tuple[list[TIRTrace], list[tuple[TIRTrace, str]]]:
    """Partition traces into (kept, discarded-with-reason); only traces whose
    final answer verified correct are kept."""
    kept: list[TIRTrace] = []
    discarded: list[tuple[TIRTrace, str]] = []
    for trace in traces:
        if trace.verdict == CORRECT:
            kept.append(trace)
        elif trace.verdict == INCORRECT:
            discarded.append((trace, "incorrect"))
        else:
            invocations = trace.invocations()
            if trace.final_answer is None and invocations and not invocations[-1].ok:
                discarded.append((trace, "tool-error-terminal"))
            else:
                discarded.append((trace, "unverified"))
    return kept, discarded


def payload_ground_truth(payload: str) -> str:
    """Ground truth for judging a translation: the tool's own result body."""
    try:
        obj = json.loads(payload)
    except (ValueError, TypeError):
        return payload
    if isinstance(obj, dict) and "result" in obj:
        result = obj["result"]
        if isinstance(result, str):
            return result
        if isinstance(result, list):
            return "[" + ", ".join(
                item if isinstance(item, str) else json.dumps(item, ensure_ascii=False)
                for item in result
            ) + "]"
        if isinstance(result, (int, float)):
            return str(result)
        return json.dumps(result, ensure_ascii=False)
    return payload


def translate_tool_call(
    invocation: ToolInvocation,
    descriptor,
    gateway: Gateway,
    verifier: Verifier,
    templates: dict | None = None,
    max_attempts: int = TRANSLATOR_MAX_ATTEMPTS,
    invocation_index: int = 0,
    base_seed: int = 0,
) -> SubproblemTranslation:
    """Derive one tool call in natural language and judge it against the
    tool's output; retries (fresh sampling) up to ``max_attempts``."""
    if not invocation.ok:
        raise ValueError("only successful invocations are translated")
    templates = templates or prompts.default_templates()
    prompt = prompts.render_prompt(
        templates["translator"],
        {
            "tool_name": invocation.tool,
            "docstring": descriptor.description.rstrip("."),
            "arguments": invocation.arguments,
        },
    )
    ground_truth = payload_ground_truth(invocation.payload)
    derivation, answer, rationale = "", None, "no attempt ran"
    attempt = 0
    for attempt in range(1, max_attempts + 1):
        temperature = None if attempt == 1 else RETRY_TEMPERATURE
        seed = None if attempt == 1 else base_seed + attempt
        try:
            reply = gateway.complete_chat([user(prompt)], temperature=temperature, seed=seed)
        except GatewayError as exc:
            rationale = f"gateway error: {exc}"
            continue
        derivation = reply.content
        try:
            answer = extract_boxed(derivation)
        except UnbalancedBraces:
            answer = None
        if answer is None or not answer.strip():
            rationale = "derivation has no boxed answer"
            continue
        accepted, rationale = verifier.judge_equivalence(ground_truth, answer)
        if accepted:
            return SubproblemTranslation(
                invocation_index, invocation.tool, invocation.arguments, prompt,
                derivation, answer, ACCEPTED, rationale, attempt, True,
            )
    return SubproblemTranslation(
        invocation_index, invocation.tool, invocation.arguments, prompt,
        derivation, answer, REJECTED, rationale, attempt, False,
    )


def backtranslate_trace(
    trace: TIRTrace,
    registry: Registry,
    gateway: Gateway,
    verifier: Verifier,
    templates: dict | None = None,
    max_attempts: int = TRANSLATOR_MAX_ATTEMPTS,
) -> BackTranslatedTrace:
    """Replace each successful invocation with its accepted derivation;
    rejected ones retain the original tool call (failed ones stay as
    context). Tallies feed the per-tool acceptance report."""
    body: list = []
    translations: list[SubproblemTranslation] = []
    tallies: dict = defaultdict(lambda: {"attempted": 0, "accepted": 0})
    for index, segment in enumerate(trace.segments):
        if isinstance(segment, MessageSegment):
            body.append(segment)
            continue
        if not segment.ok:
            body.append(segment)  # kept as context only; never translated
            continue
        descriptor = registry.get(segment.tool)
        translation = translate_tool_call(
            segment, descriptor, gateway, verifier,
            templates=templates, max_attempts=max_attempts, invocation_index=index,
        )
        translations.append(translation)
        tallies[segment.tool]["attempted"] += 1
        if translation.accepted:
            tallies[segment.tool]["accepted"] += 1
            body.append(translation)
        else:
            body.append(segment)
    return BackTranslatedTrace(
        problem_id=trace.problem_id,
        plan=trace.plan,
        body=body,
        final_answer=trace.final_answer,
        translations=translations,
        tallies=dict(tallies),
    )


def render_backtranslated_body(bt: BackTranslatedTrace) -> str:
    """Marker text handed to the rephrase agent: derivations appear as
    ``<cot>`` blocks in place of raw results."""
    blocks = [f"<message>\n{bt.plan}\n</message>"]
    for item in bt.body:
        if isinstance(item, MessageSegment):
            blocks.append(f"<message>\n{item.text}\n</message>")
        elif isinstance(item, SubproblemTranslation):
            blocks.append(
                "<tool>\n"
                f"<tool_name>{item.tool}</tool_name>\n"
                f"<args>{item.arguments}</args>\n"
                "<cot>\n"
                f"Chain of Thought for {item.tool}:\n"
                f"{item.derivation}\n"
                "</cot>\n"
                "</tool>"
            )
        else:  # retained raw invocation
            blocks.append(
                "<tool>\n"
                f"<tool_name>{item.tool}</tool_name>\n"
                f"<args>{item.arguments}</args>\n"
                f"<result>{item.result_text()}</result>\n"
                "</tool>"
            )
    return "\n\n".join(blocks)


def validate_holistic(text: str, expected_answer: str | None, verifier: Verifier) -> list[str]:
    """Lint a rephrased solution; empty list means it passes."""
    issues: list[str] = []
    try:
        boxed = extract_boxed(text)
    except UnbalancedBraces:
        boxed = None
        issues.append("boxed answer has unbalanced braces")
    if boxed is None or not boxed.strip():
        issues.append("no boxed answer")
    elif expected_answer:
        accepted, rationale = verifier.judge_equivalence(expected_answer, boxed)
        if not accepted:
            issues.append(f"final answer not equivalent to the trace answer: {rationale}")
    if _MARKER_RE.search(text):
        issues.append("contains tool markers")
    if _SYMPY_RE.search(text):
        issues.append("mentions the symbolic backend by name")
    if _CODE_WORD_RE.search(text):
        issues.append("mentions code")
    return issues


def rephrase_trace(
    bt: BackTranslatedTrace,
    gateway: Gateway,
    verifier: Verifier,
    templates: dict | None = None,
) -> tuple[str | None, str]:
    """Produce the holistic solution; one re-ask on validation failure,
    then the record is rejected with the lint reasons."""
    templates = templates or prompts.default_templates()
    prompt = prompts.render_prompt(
        templates["rephrase"], {"trace": render_backtranslated_body(bt)}
    )
    issues: list[str] = ["no attempt ran"]
    for _ in range(2):
        reply = gateway.complete_chat([user(prompt)])
        issues = validate_holistic(reply.content, bt.final_answer, verifier)
        if not issues:
            bt.holistic = reply.content
            return reply.content, "ok"
    return None, "; ".join(issues)


def acceptance_stats(translations) -> list[dict]:
    """Per-tool acceptance rates, ascending; tools with zero attempts are
    omitted."""
    tallies: dict = defaultdict(lambda: {"attempted": 0, "accepted": 0})
    for t in translations:
        tallies[t.tool]["attempted"] += 1
        if t.accepted:
            tallies[t.tool]["accepted"] += 1
    rows = [
        {
            "tool": tool,
            "attempted": counts["attempted"],
            "accepted": counts["accepted"],
            "rate": counts["accepted"] / counts["attempted"],
        }
        for tool, counts in tallies.items()
        if counts["attempted"] > 0
    ]
    rows.sort(key=lambda r: (r["rate"], r["tool"]))
    return rows


def stats_from_tallies(tallies: dict) -> list[dict]:
    """Same report shape, built from stored per-trace tallies."""
    rows = [
        {
            "tool": tool,
            "attempted": counts["attempted"],
            "accepted": counts["accepted"],
            "rate": counts["accepted"] / counts["attempted"],
        }
        for tool, counts in tallies.items()
        if counts.get("attempted", 0) > 0
    ]
    rows.sort(key=lambda r: (r["rate"], r["tool"]))
    return rows


def format_stats_table(rows) -> str:
    if not rows:
        return "no tool invocations were translated\n"
    width = max(len(r["tool"]) for r in rows)
    lines = [f"{'tool':<{width}}  attempted  accepted    rate"]
    for r in rows:
        lines.append(f"{r['tool']:<{width}}  {r['attempted']:>9}  {r['accepted']:>8}  {r['rate']:.4f}")
    return "\n".join(lines) + "\n"


def merge_tallies(into: dict, extra: dict) -> dict:
    for tool, counts in extra.items():
        slot = into.setdefault(tool, {"attempted": 0, "accepted": 0})
        slot["attempted"] += counts.get("attempted", 0)
        slot["accepted"] += counts.get("accepted", 0)
    return into
