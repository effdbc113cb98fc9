"""Trace domain types and their serializations.

A trace interleaves free-text reasoning segments with tool invocations.
Two serializations exist: a JSON dict for the store, and the marker text
format (``<message>``/``<tool>`` blocks) that downstream agents consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

CORRECT = "correct"
INCORRECT = "incorrect"
UNVERIFIED = "unverified"

MAX_STEPS = 15


@dataclass(frozen=True)
class Problem:
    problem_id: str
    question: str
    answer: str | None = None
    source: str = ""

    @classmethod
    def from_dict(cls, obj: dict) -> "Problem":
        return cls(
            problem_id=str(obj.get("id") or obj.get("problem_id")),
            question=obj["question"],
            answer=obj.get("answer"),
            source=obj.get("source", ""),
        )


@dataclass(frozen=True)
class MessageSegment:
    text: str


@dataclass(frozen=True)
class ToolInvocation:
    tool: str
    arguments: str  # raw JSON text as sent by the model
    payload: str  # executor payload, byte-for-byte
    ok: bool
    attempts: int
    elapsed_ms: int = 0
    message: str = ""  # error text when not ok

    def result_text(self) -> str:
        """What the model saw as the tool result."""
        if self.payload:
            return self.payload
        return json.dumps({"status": "error", "message": self.message}, ensure_ascii=False)


@dataclass
class TIRTrace:
    problem_id: str
    plan: str
    segments: list = field(default_factory=list)  # MessageSegment | ToolInvocation
    final_answer: str | None = None
    step_count: int = 0
    verdict: str = UNVERIFIED
    accounting: dict = field(default_factory=dict)

    def invocations(self) -> list[ToolInvocation]:
        return [s for s in self.segments if isinstance(s, ToolInvocation)]

    def messages(self) -> list[MessageSegment]:
        return [s for s in self.segments if isinstance(s, MessageSegment)]

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "plan": self.plan,
            "segments": [_segment_to_dict(s) for s in self.segments],
            "final_answer": self.final_answer,
            "step_count": self.step_count,
            "verdict": self.verdict,
            "accounting": dict(self.accounting),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TIRTrace":
        return cls(
            problem_id=obj["problem_id"],
            plan=obj.get("plan", ""),
            segments=[_segment_from_dict(s) for s in obj.get("segments", [])],
            final_answer=obj.get("final_answer"),
            step_count=obj.get("step_count", 0),
            verdict=obj.get("verdict", UNVERIFIED),
            accounting=dict(obj.get("accounting", {})),
        )


def _segment_to_dict(segment) -> dict:
    if isinstance(segment, MessageSegment):
        return {"kind": "message", "text": segment.text}
    if isinstance(segment, ToolInvocation):
        return {
            "kind": "tool",
            "tool": segment.tool,
            "arguments": segment.arguments,
            "payload": segment.payload,
            "ok": segment.ok,
            "attempts": segment.attempts,
            "elapsed_ms": segment.elapsed_ms,
            "message": segment.message,
        }
    raise TypeError(f"not a trace segment: {segment!r}")


def _segment_from_dict(obj: dict):
    if obj.get("kind") == "message":
        return MessageSegment(obj["text"])
    if obj.get("kind") == "tool":
        return ToolInvocation(
            tool=obj["tool"],
            arguments=obj.get("arguments", "{}"),
            payload=obj.get("payload", ""),
            ok=bool(obj.get("ok")),
            attempts=int(obj.get("attempts", 1)),
            elapsed_ms=int(obj.get("elapsed_ms", 0)),
            message=obj.get("message", ""),
        )
    raise ValueError(f"unknown segment kind {obj.get('kind')!r}")


def render_trace_markers(trace: TIRTrace) -> str:
    """Marker text form: plan and reasoning in ``<message>`` blocks, tool
    calls as ``<tool>`` blocks with their raw arguments and results."""
    blocks = [f"<message>\n{trace.plan}\n</message>"]
    for segment in trace.segments:
        if isinstance(segment, MessageSegment):
            blocks.append(f"<message>\n{segment.text}\n</message>")
        else:
            blocks.append(
                "<tool>\n"
                f"<tool_name>{segment.tool}</tool_name>\n"
                f"<args>{segment.arguments}</args>\n"
                f"<result>{segment.result_text()}</result>\n"
                "</tool>"
            )
    return "\n\n".join(blocks)


def scrub_volatile(trace_dict: dict) -> dict:
    """Copy of a serialized trace with timing fields zeroed, for
    byte-stable comparisons."""
    out = json.loads(json.dumps(trace_dict))
    for segment in out.get("segments", []):
        if segment.get("kind") == "tool":
            segment["elapsed_ms"] = 0
    return out
