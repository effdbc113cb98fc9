"""Sidecar executor pool: line-delimited JSON requests over worker stdin/stdout.

Wire protocol v1, one JSON object per line:

    request:  {"id": <int>, "tool": "<name>", "args": {...}}
    response: {"id": <int>, "ok": <bool>, "payload": "<string>", "message": "<string>"}

A worker answers the handshake tool ``__ping__`` with payload ``pong``.
Each tool call gets a retry budget; a timed-out attempt kills the worker
process outright (a wedged symbolic computation would otherwise poison it)
and a fresh worker takes its slot.
"""

from __future__ import annotations

import json
import os
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field

KILL_GRACE_S = 2.0
HANDSHAKE_TIMEOUT_S = 10.0


class LaunchError(RuntimeError):
    """Worker process failed to start or did not answer the handshake."""


class ExecutorUnavailable(RuntimeError):
    """The pool is shut down (or died) and cannot serve calls."""


class BudgetExhausted(RuntimeError):
    """All attempts failed; carries the final failure response."""

    def __init__(self, response: "ExecutorResponse"):
        self.response = response
        super().__init__(
            f"tool call failed after {response.attempts} attempts: {response.message}"
        )


@dataclass(frozen=True)
class CallBudget:
    max_attempts: int = 5
    timeout_s: float = 30.0

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")


@dataclass(frozen=True)
class LaunchSpec:
    command: tuple[str, ...]
    env: dict = field(default_factory=dict)

    @classmethod
    def from_command(cls, command, env: dict | None = None) -> "LaunchSpec":
        if isinstance(command, str):
            command = tuple(shlex.split(command))
        return cls(tuple(command), dict(env or {}))


@dataclass(frozen=True)
class ExecutorRequest:
    request_id: int
    tool: str
    args: dict

    def to_line(self) -> str:
        return json.dumps(
            {"id": self.request_id, "tool": self.tool, "args": self.args},
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class ExecutorResponse:
    request_id: int
    ok: bool
    payload: str
    message: str
    elapsed_ms: int
    attempts: int

    def result_body(self) -> str:
        """Text to hand back to the model: the payload, or an error envelope."""
        if self.payload:
            return self.payload
        return json.dumps({"status": "error", "message": self.message}, ensure_ascii=False)


def normalize_envelope(payload: str) -> tuple[bool, str]:
    """Classify a tool payload as logical success or failure.

    Tool wrappers emit either ``{"status": "success", "result": ...}``,
    a bare ``{"result": ...}``, or ``{"status": "error", "message": ...}``.
    Anything that is not an explicit error envelope counts as success and
    the payload body is preserved byte-for-byte.
    """
    try:
        obj = json.loads(payload)
    except (ValueError, TypeError):
        return True, ""
    if isinstance(obj, dict) and obj.get("status") == "error":
        return False, str(obj.get("message", "tool error"))
    return True, ""


class _AttemptTimeout(Exception):
    pass


class _WorkerDied(Exception):
    pass


class _Worker:
    """One executor process plus its stdout reader thread.

    Request ids are scoped to the process: a respawned worker starts over,
    and its fresh line queue guarantees that output from a killed process
    can never be attributed to a live one.
    """

    def __init__(self, spec: LaunchSpec):
        env = dict(os.environ)
        env.update(spec.env)
        try:
            self.proc = subprocess.Popen(
                list(spec.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
                env=env,
            )
        except OSError as exc:
            raise LaunchError(f"cannot launch executor {spec.command!r}: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._next_id = 1
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        try:
            for line in self.proc.stdout:
                self._lines.put(line)
        except ValueError:
            pass  # stream closed under us
        self._lines.put(None)

    def request(self, tool: str, args: dict, timeout_s: float) -> dict:
        req = ExecutorRequest(self._next_id, tool, args)
        self._next_id += 1
        try:
            self.proc.stdin.write(req.to_line() + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            raise _WorkerDied() from None
        deadline = time.monotonic() + timeout_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise _AttemptTimeout()
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                raise _AttemptTimeout() from None
            if line is None:
                raise _WorkerDied()
            try:
                obj = json.loads(line)
            except ValueError:
                continue  # garbage on stdout; keep waiting for our id
            if isinstance(obj, dict) and obj.get("id") == req.request_id:
                return obj
            # stale or foreign id: ignore

    def ping(self, timeout_s: float = HANDSHAKE_TIMEOUT_S) -> None:
        try:
            obj = self.request("__ping__", {}, timeout_s)
        except (_AttemptTimeout, _WorkerDied) as exc:
            raise LaunchError("executor did not answer handshake") from exc
        if not obj.get("ok") or obj.get("payload") != "pong":
            raise LaunchError(f"unexpected handshake response: {obj!r}")

    def kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
        try:
            self.proc.wait(timeout=KILL_GRACE_S)
        except subprocess.TimeoutExpired:
            pass
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                if stream:
                    stream.close()
            except OSError:
                pass


_POISON = object()


class ExecutorPool:
    """Fixed-size pool of executor workers with FIFO dispatch."""

    def __init__(self, size: int, spec: LaunchSpec):
        if size < 1:
            raise ValueError("pool size must be >= 1")
        self._spec = spec
        self._slots: queue.Queue = queue.Queue()
        self._all: set[_Worker] = set()
        self._lock = threading.Lock()
        self._closed = False
        started: list[_Worker] = []
        try:
            for _ in range(size):
                worker = _Worker(spec)
                worker.ping()
                started.append(worker)
        except LaunchError:
            for w in started:
                w.kill()
            raise
        for w in started:
            self._all.add(w)
            self._slots.put(w)

    @property
    def closed(self) -> bool:
        return self._closed

    def call_tool(self, tool: str, args: dict, budget: CallBudget = CallBudget()) -> ExecutorResponse:
        """Run one tool call under the retry/timeout budget.

        Returns the first logically-successful response. Raises
        BudgetExhausted (carrying the last failure, attempts = max) when
        every attempt fails, and ExecutorUnavailable once the pool is shut
        down.
        """
        last: ExecutorResponse | None = None
        for attempt in range(1, budget.max_attempts + 1):
            worker = self._acquire()
            started = time.monotonic()
            try:
                wire = worker.request(tool, args, budget.timeout_s)
            except _AttemptTimeout:
                self._retire(worker)
                elapsed = int((time.monotonic() - started) * 1000)
                last = ExecutorResponse(
                    -1, False, "",
                    f"attempt timed out after {budget.timeout_s:g}s; worker killed",
                    elapsed, attempt,
                )
                continue
            except _WorkerDied:
                self._retire(worker)
                if self._closed:
                    raise ExecutorUnavailable("pool shut down during call") from None
                elapsed = int((time.monotonic() - started) * 1000)
                last = ExecutorResponse(-1, False, "", "worker exited unexpectedly", elapsed, attempt)
                continue
            else:
                self._release(worker)
            elapsed = int((time.monotonic() - started) * 1000)
            if not wire.get("ok", False):
                last = ExecutorResponse(
                    int(wire.get("id", -1)), False,
                    str(wire.get("payload", "")),
                    str(wire.get("message", "")) or "executor reported failure",
                    elapsed, attempt,
                )
                continue
            payload = str(wire.get("payload", ""))
            ok, message = normalize_envelope(payload)
            response = ExecutorResponse(int(wire.get("id", -1)), ok, payload, message, elapsed, attempt)
            if ok:
                return response
            last = response
        assert last is not None
        raise BudgetExhausted(last)

    def shutdown(self) -> None:
        """Terminate all workers; idempotent. Pending calls resolve as
        ExecutorUnavailable."""
        with self._lock:
            if self._closed:
                return
            self._closed = True
            workers = list(self._all)
            self._all.clear()
        for w in workers:
            w.kill()
        self._slots.put(_POISON)

    def _acquire(self) -> _Worker:
        if self._closed:
            raise ExecutorUnavailable("pool is shut down")
        item = self._slots.get()
        if item is _POISON:
            self._slots.put(_POISON)  # wake the next waiter
            raise ExecutorUnavailable("pool is shut down")
        return item

    def _release(self, worker: _Worker) -> None:
        if self._closed:
            worker.kill()
            return
        self._slots.put(worker)

    def _retire(self, worker: _Worker) -> None:
        """Kill a misbehaving worker and put a fresh one in its slot."""
        worker.kill()
        with self._lock:
            self._all.discard(worker)
            if self._closed:
                return
        try:
            replacement = _Worker(self._spec)
            replacement.ping()
        except LaunchError:
            # slot is lost; if it was the last one, future calls fail fast
            with self._lock:
                if not self._all:
                    self._closed = True
                    self._slots.put(_POISON)
            return
        with self._lock:
            if self._closed:
                replacement.kill()
                return
            self._all.add(replacement)
        self._slots.put(replacement)


def start_pool(size: int, spec: LaunchSpec) -> ExecutorPool:
    """Launch ``size`` executor workers; each must answer the handshake
    within 10 seconds."""
    return ExecutorPool(size, spec)
