import json

import pytest

from tirforge.backtranslate import (
    Verifier,
    acceptance_stats,
    backtranslate_trace,
    filter_traces,
    format_stats_table,
    payload_ground_truth,
    render_backtranslated_body,
    rephrase_trace,
    translate_tool_call,
    validate_holistic,
)
from tirforge.gateway import Gateway, ScriptedEndpoint
from tirforge.registry import load_registry
from tirforge.traces import MessageSegment, TIRTrace, ToolInvocation


@pytest.fixture(scope="module")
def registry():
    return load_registry()


def _invocation(tool="solve_equation", payload='{"result": ["2", "-2"]}', ok=True):
    return ToolInvocation(tool, json.dumps({"sympy_equation": "x**2 - 4"}), payload, ok, 1)


def _trace(segments, verdict="correct", final_answer="6"):
    return TIRTrace(
        problem_id="t1", plan="plan", segments=segments,
        final_answer=final_answer, step_count=1, verdict=verdict,
    )


class TestFilter:
    def test_correct_kept(self):
        kept, discarded = filter_traces([_trace([MessageSegment("m")])])
        assert len(kept) == 1 and not discarded

    def test_incorrect_discarded(self):
        kept, discarded = filter_traces([_trace([], verdict="incorrect")])
        assert not kept and discarded[0][1] == "incorrect"

    def test_unverified_discarded(self):
        kept, discarded = filter_traces([_trace([], verdict="unverified")])
        assert discarded[0][1] == "unverified"

    def test_terminal_tool_error_reason(self):
        trace = _trace(
            [_invocation(ok=False, payload="")], verdict="unverified", final_answer=None
        )
        kept, discarded = filter_traces([trace])
        assert discarded[0][1] == "tool-error-terminal"

    def test_partition_is_exact(self):
        traces = [
            _trace([]), _trace([], verdict="incorrect"), _trace([], verdict="unverified"),
        ]
        kept, discarded = filter_traces(traces)
        assert len(kept) + len(discarded) == len(traces)


class TestPayloadGroundTruth:
    def test_list_result(self):
        assert payload_ground_truth('{"result": ["(4, 0)"]}') == "[(4, 0)]"

    def test_scalar_result(self):
        assert payload_ground_truth('{"result": 2}') == "2"

    def test_string_result(self):
        assert payload_ground_truth('{"status": "success", "result": "x + 1"}') == "x + 1"

    def test_non_json_passthrough(self):
        assert payload_ground_truth("Tuple(Integer(4), Integer(0))") == "Tuple(Integer(4), Integer(0))"


class TestTranslate:
    def test_accepted_first_try(self, registry):
        gateway = Gateway(ScriptedEndpoint(["reasoning... \\boxed{2, -2}"]))
        translation = translate_tool_call(
            _invocation(), registry.get("solve_equation"), gateway, Verifier()
        )
        assert translation.accepted and translation.attempts == 1
        assert translation.verdict == "accepted"

    def test_accepted_on_second_attempt(self, registry):
        endpoint = ScriptedEndpoint(["\\boxed{5}", "\\boxed{2, -2}"])
        translation = translate_tool_call(
            _invocation(), registry.get("solve_equation"), Gateway(endpoint), Verifier()
        )
        assert translation.accepted and translation.attempts == 2
        # retries switch to exploratory sampling with distinct seeds
        assert endpoint.requests[0]["temperature"] == 0.0
        assert endpoint.requests[1]["temperature"] == 0.7
        assert endpoint.requests[1]["seed"] is not None

    def test_rejected_after_three_attempts(self, registry):
        endpoint = ScriptedEndpoint(["\\boxed{5}", "\\boxed{6}", "\\boxed{7}", "\\boxed{2, -2}"])
        translation = translate_tool_call(
            _invocation(), registry.get("solve_equation"), Gateway(endpoint), Verifier()
        )
        assert not translation.accepted and translation.attempts == 3
        assert len(endpoint.requests) == 3  # never consumed the fourth turn

    def test_missing_box_counts_as_failed_attempt(self, registry):
        endpoint = ScriptedEndpoint(["no box at all", "\\boxed{2, -2}"])
        translation = translate_tool_call(
            _invocation(), registry.get("solve_equation"), Gateway(endpoint), Verifier()
        )
        assert translation.accepted and translation.attempts == 2

    def test_failed_invocations_never_translated(self, registry):
        with pytest.raises(ValueError):
            translate_tool_call(
                _invocation(ok=False), registry.get("solve_equation"),
                Gateway(ScriptedEndpoint([])), Verifier(),
            )

    def test_prompt_carries_tool_docstring_and_args(self, registry):
        endpoint = ScriptedEndpoint(["\\boxed{2, -2}"])
        translate_tool_call(
            _invocation(), registry.get("solve_equation"), Gateway(endpoint), Verifier()
        )
        prompt = endpoint.requests[0]["messages"][0]["content"]
        assert "Problem: solve_equation" in prompt
        assert "Solves an equation for a specific variable" in prompt
        assert "x**2 - 4" in prompt


class TestJudge:
    def test_exact_path_accepts(self):
        accepted, rationale = Verifier().judge_equivalence("8", "8")
        assert accepted and "exact" in rationale

    def test_different_rejects(self):
        accepted, _ = Verifier().judge_equivalence("sqrt(15)", "sqrt(3)")
        assert not accepted

    def test_set_match_after_latex_normalization(self):
        accepted, _ = Verifier().judge_equivalence(
            "[(1, sqrt(15)), (1, -sqrt(15))]",
            r"(x, y) = (1, \sqrt{15}) \text{ and } (1, -\sqrt{15})",
        )
        assert accepted

    def test_unknown_escalates_to_llm_judge(self):
        judge = Gateway(ScriptedEndpoint(["They match. \\boxed{True}"]))
        accepted, rationale = Verifier(judge_gateway=judge).judge_equivalence("six", "6")
        assert accepted and "llm-judge" in rationale

    def test_judge_false_rejects(self):
        judge = Gateway(ScriptedEndpoint(["Nope. \\boxed{False}"]))
        accepted, _ = Verifier(judge_gateway=judge).judge_equivalence("six", "7")
        assert not accepted

    def test_unparseable_judge_reasked_then_rejected(self):
        judge_endpoint = ScriptedEndpoint(["no box", "still no box"])
        accepted, rationale = Verifier(judge_gateway=judge_endpoint and Gateway(judge_endpoint)).judge_equivalence("six", "6")
        assert not accepted and rationale == "judge unparseable"
        assert len(judge_endpoint.requests) == 2

    def test_no_judge_unknown_rejects(self):
        accepted, rationale = Verifier().judge_equivalence("six", "6")
        assert not accepted and "no judge" in rationale


class TestBacktranslateTrace:
    def test_all_accepted(self, registry):
        trace = _trace([MessageSegment("m"), _invocation(), _invocation()])
        gateway = Gateway(ScriptedEndpoint(["\\boxed{2, -2}", "\\boxed{2, -2}"]))
        out = backtranslate_trace(trace, registry, gateway, Verifier())
        assert out.tallies["solve_equation"] == {"attempted": 2, "accepted": 2}
        kinds = [type(item).__name__ for item in out.body]
        assert kinds == ["MessageSegment", "SubproblemTranslation", "SubproblemTranslation"]

    def test_rejected_retains_raw_invocation(self, registry):
        trace = _trace([_invocation()])
        gateway = Gateway(ScriptedEndpoint(["\\boxed{9}", "\\boxed{9}", "\\boxed{9}"]))
        out = backtranslate_trace(trace, registry, gateway, Verifier())
        assert out.tallies["solve_equation"] == {"attempted": 1, "accepted": 0}
        assert isinstance(out.body[0], ToolInvocation)
        rendered = render_backtranslated_body(out)
        assert "<result>" in rendered and "<cot>" not in rendered

    def test_failed_invocation_kept_as_context(self, registry):
        trace = _trace([_invocation(ok=False, payload="")])
        out = backtranslate_trace(trace, registry, Gateway(ScriptedEndpoint([])), Verifier())
        assert out.tallies == {}
        assert isinstance(out.body[0], ToolInvocation)

    def test_zero_invocations_unchanged(self, registry):
        trace = _trace([MessageSegment("only text")])
        out = backtranslate_trace(trace, registry, Gateway(ScriptedEndpoint([])), Verifier())
        assert [type(i).__name__ for i in out.body] == ["MessageSegment"]

    def test_cot_block_rendering(self, registry):
        trace = _trace([_invocation()])
        gateway = Gateway(ScriptedEndpoint(["steps here \\boxed{2, -2}"]))
        out = backtranslate_trace(trace, registry, gateway, Verifier())
        rendered = render_backtranslated_body(out)
        assert "<cot>\nChain of Thought for solve_equation:" in rendered
        assert "steps here" in rendered


class TestRephrase:
    def test_valid_solution_passes(self, registry):
        trace = _trace([MessageSegment("m")])
        bt_trace = backtranslate_trace(trace, registry, Gateway(ScriptedEndpoint([])), Verifier())
        gateway = Gateway(ScriptedEndpoint(["A clean solution. \\boxed{6}"]))
        holistic, reason = rephrase_trace(bt_trace, gateway, Verifier())
        assert holistic is not None and reason == "ok"

    def test_marker_leak_reasked_then_rejected(self, registry):
        trace = _trace([MessageSegment("m")])
        bt_trace = backtranslate_trace(trace, registry, Gateway(ScriptedEndpoint([])), Verifier())
        bad = "answer <tool> leak \\boxed{6}"
        gateway = Gateway(ScriptedEndpoint([bad, bad]))
        holistic, reason = rephrase_trace(bt_trace, gateway, Verifier())
        assert holistic is None and "tool markers" in reason

    def test_wrong_answer_rejected(self, registry):
        trace = _trace([MessageSegment("m")])
        bt_trace = backtranslate_trace(trace, registry, Gateway(ScriptedEndpoint([])), Verifier())
        gateway = Gateway(ScriptedEndpoint(["\\boxed{7}", "\\boxed{7}"]))
        holistic, reason = rephrase_trace(bt_trace, gateway, Verifier())
        assert holistic is None and "not equivalent" in reason

    def test_lint_rules(self):
        verifier = Verifier()
        assert validate_holistic("no box", "6", verifier)
        assert any("markers" in i for i in validate_holistic("<args> \\boxed{6}", "6", verifier))
        assert any("backend" in i for i in validate_holistic("using SymPy \\boxed{6}", "6", verifier))
        assert any("code" in i for i in validate_holistic("the code says \\boxed{6}", "6", verifier))
        # "code" must be a standalone word
        assert not any(
            "code" in issue for issue in validate_holistic("we decode \\boxed{6}", "6", verifier)
        )
        assert validate_holistic("", "6", verifier)


class TestStats:
    def test_hand_counted_fixture(self, registry):
        trace = _trace([_invocation() for _ in range(4)])
        replies = ["\\boxed{2, -2}", "\\boxed{9}", "\\boxed{9}", "\\boxed{9}",
                   "\\boxed{2, -2}", "\\boxed{2, -2}"]
        gateway = Gateway(ScriptedEndpoint(replies))
        out = backtranslate_trace(trace, registry, gateway, Verifier())
        rows = acceptance_stats(out.translations)
        assert rows == [
            {"tool": "solve_equation", "attempted": 4, "accepted": 3, "rate": 0.75}
        ]

    def test_all_accepted_rate_one(self, registry):
        trace = _trace([_invocation()])
        gateway = Gateway(ScriptedEndpoint(["\\boxed{2, -2}"]))
        out = backtranslate_trace(trace, registry, gateway, Verifier())
        rows = acceptance_stats(out.translations)
        assert rows[0]["rate"] == 1.0

    def test_rates_bounded_and_sorted(self):
        from tirforge.backtranslate import SubproblemTranslation

        translations = []
        for tool, accepted_flags in [("a", [True, False]), ("b", [True]), ("c", [False])]:
            for flag in accepted_flags:
                translations.append(
                    SubproblemTranslation(0, tool, "{}", "p", "d", "x",
                                          "accepted" if flag else "rejected", "", 1, flag)
                )
        rows = acceptance_stats(translations)
        rates = [r["rate"] for r in rows]
        assert rates == sorted(rates)
        assert all(0.0 <= r <= 1.0 for r in rates)
        for row in rows:
            assert row["accepted"] <= row["attempted"]

    def test_table_formatting(self):
        text = format_stats_table([{"tool": "t", "attempted": 4, "accepted": 3, "rate": 0.75}])
        assert "0.7500" in text
