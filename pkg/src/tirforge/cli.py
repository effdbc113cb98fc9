"""Command-line entry points for the whole pipeline.

Subcommands: generate (problems -> trace store), backtranslate (trace store
-> record store + acceptance stats), dedup, export, stats, eval. Runs are
resumable: ids already in the target store under the same pipeline-version
hash are skipped.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from . import backtranslate as bt
from . import dataset, prompts
from .bridge import CallBudget, LaunchSpec, start_pool
from .config import ConfigError, PipelineConfig, load_config
from .gateway import Gateway, HttpEndpoint, ScriptedEndpoint, load_script_file
from .registry import load_registry
from .solver import SolverAgent
from .traces import TIRTrace


def _fail(stage: str, exc: Exception) -> int:
    summary = {"error": {"stage": stage, "type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(summary), file=sys.stderr)
    return 2


def _gateways(config: PipelineConfig, stub_script: str | None, audit: str | None = None) -> dict:
    """One gateway per agent role, scripted when a fixture is given."""
    gateways: dict[str, Gateway] = {}
    if stub_script:
        scripts = load_script_file(stub_script)
        for role in ("solver", "translator", "judge", "rephrase", "eval"):
            turns = scripts.get(role, [])
            gateways[role] = Gateway(ScriptedEndpoint(turns, name=role), audit_path=audit)
        return gateways
    for role, endpoint_config in config.endpoints.items():
        gateways[role] = Gateway(HttpEndpoint(endpoint_config), audit_path=audit)
    return gateways


def _verifier(gateways: dict, config: PipelineConfig) -> bt.Verifier:
    templates = prompts.load_templates(config.template_overrides or None)
    return bt.Verifier(judge_gateway=gateways.get("judge"), templates=templates)


def cmd_generate(args) -> int:
    config = load_config(args.config)
    problems = dataset.load_problems(args.problems)
    if args.limit:
        problems = problems[: args.limit]
    store_path = args.store or config.trace_store
    store = dataset.RecordStore(store_path, "trace")
    version_hash = config.version_hash()
    done = set()
    if args.resume:
        for record_id, data in store.items():
            if data.get("pipeline_hash") == version_hash:
                done.add(record_id)
    pending = [p for p in problems if p.problem_id not in done]
    if not pending:
        print(f"nothing to do: {len(problems)} problems already in {store_path}")
        return 0

    gateways = _gateways(config, args.stub_script, audit=args.audit_log)
    registry = load_registry()
    templates = prompts.load_templates(config.template_overrides or None)
    verifier = _verifier(gateways, config)
    command = config.resolved_executor_command()
    if not command:
        raise ConfigError(
            "no executor command: set executor.command in the config "
            "or the TIRFORGE_EXECUTOR_CMD environment variable"
        )
    pool = start_pool(config.executor_pool_size, LaunchSpec.from_command(command))
    budget = CallBudget(config.budgets.tool_attempts, config.budgets.tool_timeout_s)
    parallel = args.parallel or config.parallelism

    def run(problem) -> TIRTrace:
        agent = SolverAgent(
            gateways["solver"], pool, registry,
            templates=templates,
            max_steps=config.budgets.max_steps,
            budget=budget,
            verifier=verifier.verdict_for,
        )
        return agent.solve(problem)

    counts = {"correct": 0, "incorrect": 0, "unverified": 0}
    by_id = {p.problem_id: p for p in pending}

    def persist(trace: TIRTrace) -> None:
        data = trace.to_dict()
        data["pipeline_hash"] = version_hash
        problem = by_id[trace.problem_id]
        data["problem"] = {
            "question": problem.question,
            "answer": problem.answer,
            "source": problem.source,
        }
        store.append(trace.problem_id, data)
        counts[trace.verdict] = counts.get(trace.verdict, 0) + 1

    # ordered map keeps the store deterministic; incremental persistence
    # keeps a crashed run resumable
    try:
        if parallel > 1:
            with ThreadPoolExecutor(max_workers=parallel) as executor:
                for trace in executor.map(run, pending):
                    persist(trace)
        else:
            for problem in pending:
                persist(run(problem))
    finally:
        pool.shutdown()
    print(json.dumps({"generated": len(pending), "skipped": len(done), "verdicts": counts}))
    return 0


def cmd_backtranslate(args) -> int:
    config = load_config(args.config)
    store_items = dataset.RecordStore(args.store or config.trace_store, "trace").items()
    if args.limit:
        store_items = store_items[: args.limit]
    traces = [TIRTrace.from_dict(data) for _, data in store_items]
    stored_problems = {record_id: data.get("problem", {}) for record_id, data in store_items}
    kept, discarded = bt.filter_traces(traces)
    out_path = args.out or config.record_store
    out_store = dataset.RecordStore(out_path, "record")
    version_hash = config.version_hash()
    done = set()
    if args.resume:
        for record_id, data in out_store.items():
            if data.get("provenance", {}).get("pipeline_hash") == version_hash:
                done.add(record_id)
    pending = [t for t in kept if t.problem_id not in done]

    gateways = _gateways(config, args.stub_script, audit=args.audit_log)
    registry = load_registry()
    templates = prompts.load_templates(config.template_overrides or None)
    verifier = _verifier(gateways, config)
    questions = {}
    if args.problems:
        questions = {p.problem_id: p for p in dataset.load_problems(args.problems)}

    all_tallies: dict = {}
    rejected: list = []
    exported = 0
    for trace in pending:
        translated = bt.backtranslate_trace(
            trace, registry, gateways["translator"], verifier,
            templates=templates, max_attempts=config.budgets.translator_attempts,
        )
        bt.merge_tallies(all_tallies, translated.tallies)
        holistic, reason = bt.rephrase_trace(translated, gateways["rephrase"], verifier, templates)
        if holistic is None:
            rejected.append({"problem_id": trace.problem_id, "reason": reason})
            continue
        stored = stored_problems.get(trace.problem_id, {})
        problem = questions.get(trace.problem_id)
        question = (problem.question if problem else "") or stored.get("question", "")
        source = (problem.source if problem else "") or stored.get("source", "")
        if not question:
            rejected.append({"problem_id": trace.problem_id, "reason": "question text unavailable"})
            continue
        record = dataset.DatasetRecord(
            problem_id=trace.problem_id,
            question=question,
            solution=holistic,
            source=source,
            provenance={
                "trace_id": trace.problem_id,
                "models": {role: getattr(gw.endpoint, "config", None).model if getattr(gw.endpoint, "config", None) else "" for role, gw in gateways.items()},
                "pipeline_version": config.pipeline_version,
                "pipeline_hash": version_hash,
            },
            acceptance=translated.tallies,
        )
        out_store.append(record.problem_id, record.to_dict())
        exported += 1

    rows = bt.stats_from_tallies(all_tallies)
    sys.stdout.write(bt.format_stats_table(rows))
    report = {
        "input_traces": len(traces),
        "kept_after_filter": len(kept),
        "discarded": [{"problem_id": t.problem_id, "reason": reason} for t, reason in discarded],
        "rephrase_rejected": rejected,
        "records_written": exported,
        "skipped_resume": len(done),
        "acceptance": rows,
    }
    with open(out_path + ".stats.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"records_written": exported, "rejected": len(rejected), "skipped": len(done)}))
    return 0


def cmd_dedup(args) -> int:
    records = dataset.load_records(args.records)
    tests: list[tuple[str, str, str]] = []
    for test_path in args.tests:
        for item in dataset.load_benchmark(test_path):
            tests.append((item["id"], item["question"], test_path))
    train = [(r.problem_id, r.question) for r in records]
    kept_pairs, report = dataset.ngram_decontaminate(train, tests, n=args.ngram)
    kept_ids = {record_id for record_id, _ in kept_pairs}
    out_store = dataset.RecordStore(args.out, "record")
    for record in records:
        if record.problem_id in kept_ids:
            out_store.append(record.problem_id, record.to_dict())
    with open(args.out + ".report.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"kept": len(kept_ids), "removed": report.removed_count}))
    return 0


def cmd_export(args) -> int:
    records = dataset.load_records(args.records)
    manifest = dataset.export_sft(records, args.out)
    print(json.dumps(manifest))
    return 0


def cmd_stats(args) -> int:
    out: dict = {}
    if args.store:
        verdicts: dict = {}
        for trace in dataset.load_traces(args.store):
            verdicts[trace.verdict] = verdicts.get(trace.verdict, 0) + 1
        out["verdicts"] = verdicts
    if args.records:
        tallies: dict = {}
        for record in dataset.load_records(args.records):
            bt.merge_tallies(tallies, record.acceptance)
        rows = bt.stats_from_tallies(tallies)
        sys.stdout.write(bt.format_stats_table(rows))
        out["acceptance"] = rows
    print(json.dumps(out))
    return 0


def cmd_eval(args) -> int:
    config = load_config(args.config)
    gateways = _gateways(config, args.stub_script, audit=args.audit_log)
    if "eval" not in gateways:
        raise ConfigError("no eval endpoint configured")
    verifier = _verifier(gateways, config)
    benchmark = dataset.load_benchmark(args.benchmark)
    if args.limit:
        benchmark = benchmark[: args.limit]
    report = dataset.evaluate_benchmark(
        gateways["eval"], benchmark, verifier, parallelism=args.parallel or 1
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(json.dumps({"accuracy": report["accuracy"], "total": report["total"],
                      "unanswered": report["unanswered"], "flagged": report["flagged"]}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tirforge",
        description="Generate tool-integrated reasoning traces, back-translate them "
        "into natural-language solutions, and export fine-tuning datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, stores=True):
        p.add_argument("--config", help="pipeline config file (JSON)")
        p.add_argument("--stub-script", help="scripted LLM backend fixture (JSON)")
        p.add_argument("--audit-log", help="append request/response audit records here")
        p.add_argument("--parallel", type=int, default=0, help="worker threads (0 = config default)")
        p.add_argument("--limit", type=int, default=0, help="cap the number of items")
        p.add_argument("--resume", action=argparse.BooleanOptionalAction, default=True,
                       help="skip ids already completed under the same pipeline hash")

    p = sub.add_parser("generate", help="run the solver over a problems file")
    common(p)
    p.add_argument("--problems", required=True, help="line-delimited {id, question, answer?}")
    p.add_argument("--store", help="trace store path (default from config)")
    p.set_defaults(func=cmd_generate, stage="generate")

    p = sub.add_parser("backtranslate", help="turn correct traces into NL records")
    common(p)
    p.add_argument("--store", help="trace store path (default from config)")
    p.add_argument("--problems", help="problems file, to recover question text")
    p.add_argument("--out", help="record store path (default from config)")
    p.set_defaults(func=cmd_backtranslate, stage="backtranslate")

    p = sub.add_parser("dedup", help="drop records overlapping the test sets")
    p.add_argument("--records", required=True, help="record store to filter")
    p.add_argument("--tests", action="append", required=True, help="benchmark file (repeatable)")
    p.add_argument("--out", required=True, help="filtered record store")
    p.add_argument("--ngram", type=int, default=10)
    p.set_defaults(func=cmd_dedup, stage="dedup")

    p = sub.add_parser("export", help="write the fine-tuning dataset file")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export, stage="export")

    p = sub.add_parser("stats", help="verdict and acceptance tables")
    p.add_argument("--store", help="trace store")
    p.add_argument("--records", help="record store")
    p.set_defaults(func=cmd_stats, stage="stats")

    p = sub.add_parser("eval", help="greedy-decoding benchmark accuracy")
    common(p)
    p.add_argument("--benchmark", required=True, help="line-delimited {id, question, answer}")
    p.add_argument("--out", help="write the full report here")
    p.set_defaults(func=cmd_eval, stage="eval")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surfaced with a stage prefix, machine readable
        return _fail(args.stage, exc)


if __name__ == "__main__":
    sys.exit(main())
