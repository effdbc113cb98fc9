"""Chat-completion client: one HTTP backend for OpenAI-compatible endpoints
and one deterministic scripted backend for tests and golden replays."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

import requests


class GatewayError(RuntimeError):
    pass


class TransportError(GatewayError):
    """Network-level failure; the gateway retries these."""


class ApiError(GatewayError):
    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"endpoint returned status {status}: {body[:200]}")


class ContentFiltered(GatewayError):
    pass


class ScriptExhausted(GatewayError):
    """The scripted backend ran out of turns."""


@dataclass(frozen=True)
class ToolCallRequest:
    call_id: str
    name: str
    arguments: str  # raw JSON text, passed through verbatim

    def parsed_arguments(self) -> dict:
        obj = json.loads(self.arguments)
        if not isinstance(obj, dict):
            raise ValueError("tool-call arguments must be a JSON object")
        return obj


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str = ""
    tool_calls: tuple[ToolCallRequest, ...] = ()
    tool_call_id: str | None = None

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant", "tool"):
            raise ValueError(f"bad role {self.role!r}")
        if self.tool_calls and self.role != "assistant":
            raise ValueError("only assistant messages may carry tool calls")
        if self.role == "tool" and not self.tool_call_id:
            raise ValueError("tool messages need a tool_call_id")

    def to_dict(self) -> dict:
        out: dict = {"role": self.role, "content": self.content}
        if self.tool_calls:
            out["tool_calls"] = [
                {
                    "id": c.call_id,
                    "type": "function",
                    "function": {"name": c.name, "arguments": c.arguments},
                }
                for c in self.tool_calls
            ]
        if self.tool_call_id is not None:
            out["tool_call_id"] = self.tool_call_id
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ChatMessage":
        calls = tuple(
            ToolCallRequest(
                c.get("id", f"call_{i}"),
                c["function"]["name"],
                c["function"]["arguments"],
            )
            for i, c in enumerate(obj.get("tool_calls") or [])
        )
        return cls(
            role=obj["role"],
            content=obj.get("content") or "",
            tool_calls=calls,
            tool_call_id=obj.get("tool_call_id"),
        )


def system(content: str) -> ChatMessage:
    return ChatMessage("system", content)


def user(content: str) -> ChatMessage:
    return ChatMessage("user", content)


def assistant(content: str, tool_calls: tuple[ToolCallRequest, ...] = ()) -> ChatMessage:
    return ChatMessage("assistant", content, tool_calls)


def tool_result(call_id: str, content: str) -> ChatMessage:
    return ChatMessage("tool", content, tool_call_id=call_id)


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str = ""
    model: str = ""
    api_key_env: str = "TIRFORGE_API_KEY"
    temperature: float = 0.0
    timeout_s: float = 120.0
    max_retries: int = 3
    concurrency: int = 4


class HttpEndpoint:
    """OpenAI-compatible ``/chat/completions`` client."""

    def __init__(self, config: EndpointConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()

    def complete_once(self, messages, tools, temperature, seed) -> ChatMessage:
        payload: dict = {
            "model": self.config.model,
            "messages": [m.to_dict() for m in messages],
            "temperature": temperature,
        }
        if tools:
            payload["tools"] = [s.as_payload() for s in tools]
        if seed is not None:
            payload["seed"] = seed
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            resp = self._post(
                self.config.base_url.rstrip("/") + "/chat/completions",
                payload,
                headers,
            )
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code >= 500:
            raise TransportError(f"server error {resp.status_code}")
        if resp.status_code != 200:
            raise ApiError(resp.status_code, resp.text)
        body = resp.json()
        choice = body["choices"][0]
        if choice.get("finish_reason") == "content_filter":
            raise ContentFiltered("completion removed by the endpoint's content filter")
        message = dict(choice["message"])
        message.setdefault("role", "assistant")
        return ChatMessage.from_dict(message)

    def _post(self, url: str, payload: dict, headers: dict):
        return self.session.post(url, json=payload, headers=headers, timeout=self.config.timeout_s)


@dataclass
class ScriptedTurn:
    content: str = ""
    tool_calls: list[dict] = field(default_factory=list)

    def to_message(self) -> ChatMessage:
        calls = []
        for i, c in enumerate(self.tool_calls):
            arguments = c.get("arguments", {})
            if not isinstance(arguments, str):
                arguments = json.dumps(arguments, ensure_ascii=False)
            calls.append(ToolCallRequest(c.get("id", f"call_{i + 1}"), c["name"], arguments))
        return assistant(self.content, tuple(calls))


class ScriptedEndpoint:
    """Deterministic backend: turn N of the script answers call N,
    regardless of request content."""

    def __init__(self, turns: list[ScriptedTurn | str | dict], name: str = "scripted"):
        self.name = name
        self.turns = [self._coerce(t) for t in turns]
        self.requests: list[dict] = []
        self._index = 0
        self._lock = threading.Lock()
        self.config = EndpointConfig(model=f"scripted:{name}")

    @staticmethod
    def _coerce(turn) -> ScriptedTurn:
        if isinstance(turn, ScriptedTurn):
            return turn
        if isinstance(turn, str):
            return ScriptedTurn(content=turn)
        return ScriptedTurn(content=turn.get("content", ""), tool_calls=list(turn.get("tool_calls", [])))

    def complete_once(self, messages, tools, temperature, seed) -> ChatMessage:
        with self._lock:
            index = self._index
            self._index += 1
            self.requests.append(
                {
                    "turn": index,
                    "messages": [m.to_dict() for m in messages],
                    "tools": [s.name for s in tools] if tools else None,
                    "temperature": temperature,
                    "seed": seed,
                }
            )
            if index >= len(self.turns):
                raise ScriptExhausted(f"script {self.name!r} exhausted after {len(self.turns)} turns")
            return self.turns[index].to_message()


class Gateway:
    """Shareable chat client: retry-with-backoff, audit logging, and a
    per-endpoint concurrency cap."""

    def __init__(self, endpoint, audit_path: str | None = None, retry_backoff_s: float = 0.5):
        self.endpoint = endpoint
        self.audit_path = audit_path
        self.retry_backoff_s = retry_backoff_s
        self._audit_lock = threading.Lock()
        self._seq = 0
        concurrency = getattr(endpoint, "config", EndpointConfig()).concurrency
        self._slots = threading.Semaphore(max(1, concurrency))

    def complete_chat(self, messages, tools=None, temperature=None, seed=None) -> ChatMessage:
        """Run one chat completion and return the assistant turn.

        Transport errors are retried up to the endpoint's max_retries with
        exponential backoff; a successful call is audited exactly once.
        """
        if not messages:
            raise ValueError("messages must be nonempty")
        if messages[0].role not in ("system", "user"):
            raise ValueError("conversation must start with a system or user message")
        config = getattr(self.endpoint, "config", EndpointConfig())
        if temperature is None:
            temperature = config.temperature
        retries = max(1, config.max_retries)
        with self._audit_lock:
            self._seq += 1
            seq = self._seq
        last_error: TransportError | None = None
        with self._slots:
            for attempt in range(1, retries + 1):
                try:
                    reply = self.endpoint.complete_once(messages, tools, temperature, seed)
                except TransportError as exc:
                    last_error = exc
                    self._audit(seq, attempt, messages, tools, temperature, seed, None, str(exc))
                    if attempt < retries:
                        time.sleep(self.retry_backoff_s * (2 ** (attempt - 1)))
                    continue
                self._audit(seq, attempt, messages, tools, temperature, seed, reply, None)
                return reply
        raise last_error  # type: ignore[misc]

    def _audit(self, seq, attempt, messages, tools, temperature, seed, reply, error) -> None:
        if not self.audit_path:
            return
        record = {
            "seq": seq,
            "attempt": attempt,
            "status": "ok" if reply is not None else "transport-error",
            "endpoint": getattr(self.endpoint, "config", EndpointConfig()).model,
            "request": {
                "messages": [m.to_dict() for m in messages],
                "tools": [s.name for s in tools] if tools else None,
                "temperature": temperature,
                "seed": seed,
            },
            "response": reply.to_dict() if reply is not None else None,
            "error": error,
        }
        with self._audit_lock:
            with open(self.audit_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_script_file(path: str) -> dict[str, list[ScriptedTurn]]:
    """Load a scripted-backend fixture: ``{"roles": {role: [turns...]}}``."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    roles = raw.get("roles", {})
    return {
        role: [ScriptedEndpoint._coerce(t) for t in turns]
        for role, turns in roles.items()
    }
