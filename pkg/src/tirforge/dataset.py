"""Persistence, decontamination, SFT export, and the evaluation harness.

Stores are append-only line-delimited JSON files with a schema-version
header line; duplicate ids resolve latest-wins on load, which is what makes
resumable runs safe to re-append.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .backtranslate import Verifier, _MARKER_RE
from .expr import UnbalancedBraces, extract_boxed
from .gateway import Gateway, GatewayError, user
from .traces import Problem, TIRTrace

STORE_SCHEMA = "tirforge-store"
STORE_VERSION = 1


class StoreError(RuntimeError):
    pass


class SchemaVersionMismatch(StoreError):
    pass


class NotFound(KeyError):
    pass


class LintFailure(ValueError):
    def __init__(self, offenders: dict[str, list[str]]):
        self.offenders = offenders
        super().__init__(f"{len(offenders)} records fail lint: {sorted(offenders)[:5]}")


@dataclass(frozen=True)
class DatasetRecord:
    problem_id: str
    question: str
    solution: str
    source: str = ""
    provenance: dict = field(default_factory=dict)
    acceptance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "question": self.question,
            "solution": self.solution,
            "source": self.source,
            "provenance": dict(self.provenance),
            "acceptance": dict(self.acceptance),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DatasetRecord":
        return cls(
            problem_id=obj["problem_id"],
            question=obj["question"],
            solution=obj["solution"],
            source=obj.get("source", ""),
            provenance=dict(obj.get("provenance", {})),
            acceptance=dict(obj.get("acceptance", {})),
        )


def lint_record(record: DatasetRecord) -> list[str]:
    issues = []
    if not record.question.strip():
        issues.append("empty question")
    if not record.solution.strip():
        issues.append("empty solution")
    if _MARKER_RE.search(record.solution):
        issues.append("solution contains tool markers")
    return issues


class RecordStore:
    """Single-writer append-only store keyed by record id."""

    def __init__(self, path: str, kind: str):
        self.path = path
        self.kind = kind
        self._lock = threading.Lock()

    def append(self, record_id: str, data: dict) -> str:
        line = json.dumps({"id": record_id, "data": data}, ensure_ascii=False, sort_keys=True)
        with self._lock:
            new = not self._has_header()
            with open(self.path, "a", encoding="utf-8") as fh:
                if new:
                    fh.write(json.dumps(
                        {"schema": STORE_SCHEMA, "version": STORE_VERSION, "kind": self.kind},
                        sort_keys=True,
                    ) + "\n")
                fh.write(line + "\n")
        return record_id

    def _has_header(self) -> bool:
        try:
            with open(self.path, encoding="utf-8") as fh:
                return bool(fh.readline().strip())
        except FileNotFoundError:
            return False

    def _read_all(self) -> dict[str, dict]:
        records: dict[str, dict] = {}
        try:
            fh = open(self.path, encoding="utf-8")
        except FileNotFoundError:
            return records
        with fh:
            header_line = fh.readline()
            if not header_line.strip():
                return records
            try:
                header = json.loads(header_line)
            except ValueError:
                raise SchemaVersionMismatch(f"{self.path}: unreadable header") from None
            if header.get("schema") != STORE_SCHEMA or header.get("version") != STORE_VERSION:
                raise SchemaVersionMismatch(
                    f"{self.path}: expected {STORE_SCHEMA} v{STORE_VERSION}, got {header}"
                )
            if header.get("kind") != self.kind:
                raise SchemaVersionMismatch(
                    f"{self.path}: store holds {header.get('kind')!r} records, not {self.kind!r}"
                )
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                records[obj["id"]] = obj["data"]  # latest wins
        return records

    def ids(self) -> list[str]:
        return list(self._read_all())

    def get(self, record_id: str) -> dict:
        records = self._read_all()
        if record_id not in records:
            raise NotFound(record_id)
        return records[record_id]

    def items(self) -> list[tuple[str, dict]]:
        return list(self._read_all().items())


def persist_trace(trace: TIRTrace, store_path: str) -> str:
    return RecordStore(store_path, "trace").append(trace.problem_id, trace.to_dict())


def load_trace(store_path: str, trace_id: str) -> TIRTrace:
    return TIRTrace.from_dict(RecordStore(store_path, "trace").get(trace_id))


def load_traces(store_path: str) -> list[TIRTrace]:
    return [TIRTrace.from_dict(data) for _, data in RecordStore(store_path, "trace").items()]


def persist_record(record: DatasetRecord, store_path: str) -> str:
    return RecordStore(store_path, "record").append(record.problem_id, record.to_dict())


def load_records(store_path: str) -> list[DatasetRecord]:
    return [DatasetRecord.from_dict(data) for _, data in RecordStore(store_path, "record").items()]


# --- decontamination ---

_MATHISH_RE = re.compile(r"[0-9+\-*/^=<>\\(){}\[\]$_|]")
_EDGE_PUNCT = ".,;:!?\"'`"


def tokenize_question(text: str) -> list[str]:
    """Lowercased NFC tokens split on whitespace; edge punctuation is
    stripped except on math-looking tokens, which stay verbatim."""
    text = unicodedata.normalize("NFC", text).lower()
    tokens: list[str] = []
    for raw in text.split():
        if _MATHISH_RE.search(raw):
            tokens.append(raw)
            continue
        stripped = raw.strip(_EDGE_PUNCT)
        if stripped:
            tokens.append(stripped)
    return tokens


def _ngrams(tokens: list[str], n: int):
    for i in range(len(tokens) - n + 1):
        yield tuple(tokens[i : i + n])


@dataclass
class DecontaminationReport:
    input_count: int
    removed_count: int
    per_test_set: dict = field(default_factory=dict)
    collisions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "removed_count": self.removed_count,
            "per_test_set": dict(self.per_test_set),
            "collisions": list(self.collisions),
        }


def ngram_decontaminate(
    train: list[tuple[str, str]],
    tests: list[tuple[str, str, str]],
    n: int = 10,
) -> tuple[list[tuple[str, str]], DecontaminationReport]:
    """Drop every train question sharing an n-gram with any test question.

    ``train`` holds (id, question); ``tests`` holds (id, question,
    test-set name). Every removal carries a collision witness in the
    report.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lookup: dict[tuple, tuple[str, str]] = {}
    for test_id, question, set_name in tests:
        for gram in _ngrams(tokenize_question(question), n):
            lookup.setdefault(gram, (test_id, set_name))
    kept: list[tuple[str, str]] = []
    report = DecontaminationReport(input_count=len(train), removed_count=0)
    for train_id, question in train:
        witness = None
        for gram in _ngrams(tokenize_question(question), n):
            if gram in lookup:
                witness = (gram, *lookup[gram])
                break
        if witness is None:
            kept.append((train_id, question))
            continue
        gram, test_id, set_name = witness
        report.removed_count += 1
        report.per_test_set[set_name] = report.per_test_set.get(set_name, 0) + 1
        report.collisions.append(
            {
                "train_id": train_id,
                "test_id": test_id,
                "test_set": set_name,
                "shared_ngram": " ".join(gram),
            }
        )
    return kept, report


# --- export ---


def export_sft(records: list[DatasetRecord], path: str) -> dict:
    """Write line-delimited ``{question, solution, metadata}`` plus a side
    manifest; returns the manifest. Deterministic: identical records in the
    same order produce identical bytes."""
    offenders: dict[str, list[str]] = {}
    for record in records:
        issues = lint_record(record)
        if issues:
            offenders[record.problem_id] = issues
    if offenders:
        raise LintFailure(offenders)
    payload_lines = []
    for record in records:
        payload_lines.append(
            json.dumps(
                {
                    "question": record.question,
                    "solution": record.solution,
                    "metadata": {
                        "problem_id": record.problem_id,
                        "source": record.source,
                        "provenance": record.provenance,
                        "acceptance": record.acceptance,
                    },
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    blob = ("\n".join(payload_lines) + "\n") if payload_lines else ""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(blob)
    manifest = {
        "count": len(records),
        "source_tags": sorted({r.source for r in records if r.source}),
        "pipeline_versions": sorted(
            {str(r.provenance.get("pipeline_version", "")) for r in records if r.provenance}
        ),
        "content_hash": hashlib.sha256(blob.encode("utf-8")).hexdigest(),
    }
    with open(path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# --- evaluation harness ---


def load_problems(path: str) -> list[Problem]:
    problems = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                problems.append(Problem.from_dict(json.loads(line)))
    return problems


def load_benchmark(path: str) -> list[dict]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            items.append({"id": str(obj["id"]), "question": obj["question"], "answer": obj["answer"]})
    return items


def evaluate_benchmark(
    gateway: Gateway,
    benchmark: list[dict],
    verifier: Verifier | None = None,
    parallelism: int = 1,
) -> dict:
    """Greedy decoding over the benchmark; boxed answers scored by the
    equivalence policy. Endpoint failures score incorrect and are flagged."""
    verifier = verifier or Verifier()

    def run_item(item: dict) -> dict:
        out = {"id": item["id"], "extracted": None, "correct": False, "flagged": False}
        try:
            reply = gateway.complete_chat([user(item["question"])], temperature=0.0)
        except GatewayError as exc:
            out["flagged"] = True
            out["error"] = str(exc)
            return out
        try:
            extracted = extract_boxed(reply.content)
        except UnbalancedBraces:
            extracted = None
        if extracted is None or not extracted.strip():
            return out
        out["extracted"] = extracted
        accepted, rationale = verifier.judge_equivalence(item["answer"], extracted)
        out["correct"] = accepted
        out["rationale"] = rationale
        return out

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            items = list(pool.map(run_item, benchmark))
    else:
        items = [run_item(item) for item in benchmark]
    correct = sum(1 for item in items if item["correct"])
    unanswered = sum(1 for item in items if item["extracted"] is None and not item["flagged"])
    return {
        "total": len(items),
        "correct": correct,
        "accuracy": (correct / len(items)) if items else 0.0,
        "unanswered": unanswered,
        "flagged": sum(1 for item in items if item["flagged"]),
        "items": items,
    }
