import json
import threading
import time

import pytest

from tirforge.bridge import (
    BudgetExhausted,
    CallBudget,
    ExecutorUnavailable,
    LaunchError,
    LaunchSpec,
    normalize_envelope,
    start_pool,
)

from conftest import stub_command


def _pool(*extra, size=1):
    return start_pool(size, LaunchSpec(stub_command(*extra)))


class TestLifecycle:
    def test_single_worker_handshakes(self):
        pool = _pool("--mode", "echo")
        try:
            response = pool.call_tool("simplify_expression", {"expression": "x"})
            assert response.ok and response.attempts == 1
        finally:
            pool.shutdown()

    def test_multiple_workers(self):
        pool = _pool("--mode", "echo", size=3)
        try:
            for _ in range(6):
                assert pool.call_tool("t", {}).ok
        finally:
            pool.shutdown()

    def test_size_zero_rejected(self):
        with pytest.raises(ValueError):
            start_pool(0, LaunchSpec(stub_command()))

    def test_bad_command_is_launch_error(self):
        with pytest.raises(LaunchError):
            start_pool(1, LaunchSpec(("/nonexistent/executor-binary",)))

    def test_shutdown_idempotent(self):
        pool = _pool("--mode", "echo")
        pool.shutdown()
        pool.shutdown()
        with pytest.raises(ExecutorUnavailable):
            pool.call_tool("t", {})


class TestBudgets:
    def test_flaky_four_failures_then_success(self):
        pool = _pool("--mode", "flaky", "--fail-count", "4")
        try:
            response = pool.call_tool("t", {}, CallBudget(5, 30))
            assert response.ok and response.attempts == 5
        finally:
            pool.shutdown()

    def test_flaky_five_failures_exhausts_budget(self):
        pool = _pool("--mode", "flaky", "--fail-count", "5")
        try:
            with pytest.raises(BudgetExhausted) as err:
                pool.call_tool("t", {}, CallBudget(5, 30))
            assert err.value.response.attempts == 5
            assert "injected failure" in err.value.response.message
        finally:
            pool.shutdown()

    def test_sleeping_worker_killed_within_grace(self):
        pool = _pool("--mode", "sleepy", "--sleep", "60")
        try:
            started = time.monotonic()
            with pytest.raises(BudgetExhausted) as err:
                pool.call_tool("t", {}, CallBudget(2, 1.0))
            wall = time.monotonic() - started
            assert err.value.response.attempts == 2
            assert wall < 6.0  # two attempts, each within timeout + kill grace
        finally:
            pool.shutdown()

    def test_attempts_never_exceed_budget(self):
        pool = _pool("--mode", "flaky", "--fail-count", "100")
        try:
            with pytest.raises(BudgetExhausted) as err:
                pool.call_tool("t", {}, CallBudget(3, 30))
            assert err.value.response.attempts == 3
        finally:
            pool.shutdown()

    def test_budget_preconditions(self):
        with pytest.raises(ValueError):
            CallBudget(0, 30)
        with pytest.raises(ValueError):
            CallBudget(5, 0)


class TestShutdownRace:
    def test_inflight_call_resolves_unavailable(self):
        pool = _pool("--mode", "sleepy", "--sleep", "10")
        outcome = {}

        def call():
            try:
                pool.call_tool("t", {}, CallBudget(1, 30))
                outcome["result"] = "returned"
            except ExecutorUnavailable:
                outcome["result"] = "unavailable"
            except BudgetExhausted:
                outcome["result"] = "exhausted"

        thread = threading.Thread(target=call)
        thread.start()
        time.sleep(0.5)
        pool.shutdown()
        thread.join(timeout=10)
        assert outcome["result"] == "unavailable"


class TestEnvelopes:
    def test_error_envelope_is_failure(self):
        ok, message = normalize_envelope(json.dumps({"status": "error", "message": "boom"}))
        assert not ok and message == "boom"

    def test_success_status_envelope(self):
        ok, _ = normalize_envelope(json.dumps({"status": "success", "result": "1"}))
        assert ok

    def test_bare_result_envelope(self):
        ok, _ = normalize_envelope(json.dumps({"result": ["(4, 0)"]}))
        assert ok

    def test_non_json_payload_passes_through(self):
        ok, _ = normalize_envelope("Tuple(Integer(4), Integer(0))")
        assert ok

    def test_payload_preserved_byte_for_byte(self, tmp_path):
        fixture = tmp_path / "replay.json"
        raw = '{"result": ["(1, sqrt(15))", "(1, -sqrt(15))"]}'
        fixture.write_text(json.dumps({"tools": {"solve_nonlinear_system": [json.loads(raw)]}}))
        pool = _pool("--mode", "replay", "--fixture", str(fixture))
        try:
            response = pool.call_tool("solve_nonlinear_system", {})
            assert json.loads(response.payload) == json.loads(raw)
            assert "(1, sqrt(15))" in response.payload
        finally:
            pool.shutdown()
