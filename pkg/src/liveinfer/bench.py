"""Benchmark harness: load multiple-choice questions, stream them through
live or baseline sessions, score the answers, and aggregate a report.

Mock-backed runs are driven per question: every question gets its own virtual
clock, simulated stream, and scripted clients (so worker parallelism never
shares a clock), with scripts keyed by question id in a JSONL script bank.
"""

from __future__ import annotations

import csv
import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .clock import Clock, RealClock, VirtualClock
from .models import (
    HttpModelClient,
    LatencyModel,
    MockModelClient,
    ModelClientError,
    ModelRegistry,
)
from .orchestrator import SessionConfig, SessionResult, SessionStepError, run_baseline, run_session
from .streams import SimulatedInputStream, StreamAborted

MODE_LIVE = "live"
MODE_BASELINE = "baseline"

# Keeps extract_answer reliable; appended to the output-stage system message.
BENCH_TASK_HINT = "End your response with: The answer is (X)."

_ANSWER_RE = re.compile(
    r"answer\s+is\b[\s:.,*\-]*\(?\s*([A-Ja-j])\s*\)?(?![A-Za-z])", re.IGNORECASE
)
_PAREN_LETTER_RE = re.compile(r"\(\s*([A-Ja-j])\s*\)")


@dataclass(frozen=True)
class Question:
    id: str
    category: str
    question_text: str
    options: tuple[str, ...]
    answer_index: int

    def __post_init__(self):
        if not 2 <= len(self.options) <= 10:
            raise ValueError(f"question {self.id!r}: needs 2-10 options, got {len(self.options)}")
        if not 0 <= self.answer_index < len(self.options):
            raise ValueError(f"question {self.id!r}: answer_index {self.answer_index} out of range")


def load_dataset(path: str | Path) -> list[Question]:
    """JSONL, one question per line; validation errors carry line numbers."""
    path = Path(path)
    questions = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
        try:
            question = Question(
                id=str(obj["id"]),
                category=str(obj["category"]),
                question_text=str(obj["question"]),
                options=tuple(str(o) for o in obj["options"]),
                answer_index=int(obj["answer_index"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: invalid question: {exc}") from exc
        questions.append(question)
    return questions


def sample(questions: Sequence[Question], n: int, seed: int) -> list[Question]:
    """Deterministic sample without replacement; same seed, same sequence."""
    if n > len(questions):
        raise ValueError(f"cannot sample {n} of {len(questions)} questions")
    return random.Random(seed).sample(list(questions), n)


def render_question(question: Question) -> str:
    """The exact text a session streams in: question plus lettered options."""
    lines = [f"Question: {question.question_text}", "Options:"]
    for i, option in enumerate(question.options):
        lines.append(f"({chr(ord('A') + i)}) {option}")
    return "\n".join(lines)


def option_letter(index: int) -> str:
    return chr(ord("A") + index)


def extract_answer(response: str, n_options: int) -> int | None:
    """Index of the answer letter the response commits to, if any.

    Takes the last "answer is X" occurrence; falls back to the last
    standalone parenthesized letter. Out-of-range letters score as no answer.
    """
    if n_options < 2:
        raise ValueError("n_options must be >= 2")
    matches = list(_ANSWER_RE.finditer(response))
    if not matches:
        matches = list(_PAREN_LETTER_RE.finditer(response))
    if not matches:
        return None
    index = ord(matches[-1].group(1).upper()) - ord("A")
    return index if index < n_options else None


def load_script_bank(path: str | Path) -> dict[str, dict]:
    """Per-question mock scripts: JSONL of
    {"id", "inferences": [...], "final": "...", "baseline_final"?: "..."}."""
    path = Path(path)
    bank = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            bank[str(obj["id"])] = {
                "inferences": [str(s) for s in obj.get("inferences", [])],
                "final": str(obj["final"]),
                "baseline_final": str(obj.get("baseline_final", obj["final"])),
            }
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: malformed script entry: {exc}") from exc
    return bank


@dataclass
class Report:
    config: dict
    per_question: list[dict]
    mean_latency_s: float
    mean_compute_s: float
    mean_input_s: float
    accuracy_pct: float
    speedup_vs_baseline: float | None = None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "summary": {
                "n": len(self.per_question),
                "accuracy_pct": self.accuracy_pct,
                "mean_latency_s": self.mean_latency_s,
                "mean_compute_s": self.mean_compute_s,
                "mean_input_s": self.mean_input_s,
                "speedup_vs_baseline": self.speedup_vs_baseline,
            },
            "per_question": self.per_question,
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    def write_csv(self, path: str | Path) -> None:
        fields = ["id", "category", "latency_s", "compute_s", "input_s", "correct", "steps"]
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            for row in self.per_question:
                writer.writerow({k: row.get(k) for k in fields})

    def summary_line(self) -> str:
        speedup = f" ({self.speedup_vs_baseline:.1f}x)" if self.speedup_vs_baseline else ""
        return (
            f"{self.config.get('mode', '?'):8s} {self.config.get('format', '-'):7s} "
            f"{self.config.get('granularity', '-'):8s} "
            f"latency {self.mean_latency_s:7.3f}s{speedup}  "
            f"accuracy {self.accuracy_pct:6.2f}%  compute {self.mean_compute_s:7.3f}s"
        )


def attach_speedup(report: Report, baseline: Report) -> None:
    if report.mean_latency_s > 0:
        report.speedup_vs_baseline = baseline.mean_latency_s / report.mean_latency_s


def _build_registry(
    cfg: SessionConfig,
    mode: str,
    question_id: str,
    bank: dict[str, dict] | None,
    latencies: dict[str, LatencyModel],
    clock: Clock,
    http_clients: dict[str, HttpModelClient],
) -> ModelRegistry:
    registry = ModelRegistry()
    specs = {cfg.output_model.id: cfg.output_model}
    if mode == MODE_LIVE:
        specs.setdefault(cfg.inference_model.id, cfg.inference_model)

    for spec in specs.values():
        if spec.backend == "http":
            registry.add(http_clients[spec.id])
            continue
        if bank is None or question_id not in bank:
            raise ValueError(f"no mock script for question {question_id!r}")
        entry = bank[question_id]
        if mode == MODE_BASELINE:
            script = [entry["baseline_final"]]
        elif spec.id == cfg.output_model.id == cfg.inference_model.id:
            # One model in both roles: inference calls precede the final one.
            script = list(entry["inferences"]) + [entry["final"]]
        elif spec.id == cfg.output_model.id:
            script = [entry["final"]]
        else:
            script = list(entry["inferences"])
        latency = latencies.get(spec.id, LatencyModel())
        registry.add(MockModelClient(spec, script=script, latency=latency, clock=clock))
    return registry


def _evaluate_one(
    question: Question,
    cfg: SessionConfig,
    mode: str,
    chars_per_min: float,
    clock_mode: str,
    bank: dict[str, dict] | None,
    latencies: dict[str, LatencyModel],
    http_clients: dict[str, HttpModelClient],
) -> tuple[dict, SessionResult | None]:
    clock: Clock = VirtualClock() if clock_mode == "virtual" else RealClock()
    row = {
        "id": question.id,
        "category": question.category,
        "latency_s": None,
        "compute_s": None,
        "input_s": None,
        "correct": False,
        "steps": 0,
        "predicted_index": None,
        "answer_index": question.answer_index,
        "compute_by_model": {},
        "error": None,
    }
    try:
        registry = _build_registry(cfg, mode, question.id, bank, latencies, clock, http_clients)
        stream = SimulatedInputStream(render_question(question), chars_per_min, clock)
        if mode == MODE_BASELINE:
            result = run_baseline(stream, cfg, registry, clock)
        else:
            result = run_session(stream, cfg, registry, clock)
    except (SessionStepError, ModelClientError, StreamAborted, ValueError) as exc:
        row["error"] = str(exc)
        return row, None
    predicted = extract_answer(result.response, len(question.options))
    row.update(
        latency_s=result.latency_s,
        compute_s=result.compute_s,
        input_s=result.input_s,
        correct=predicted == question.answer_index,
        steps=len(result.steps),
        predicted_index=predicted,
        compute_by_model=result.compute_by_model(),
    )
    return row, result


def evaluate(
    questions: Sequence[Question],
    cfg: SessionConfig,
    mode: str,
    n: int,
    seed: int,
    *,
    chars_per_min: float = 240.0,
    clock_mode: str = "virtual",
    script_bank: dict[str, dict] | None = None,
    mock_latencies: dict[str, LatencyModel] | None = None,
    workers: int = 1,
    trace_dir: str | Path | None = None,
    config_echo: dict | None = None,
) -> Report:
    """Run the sampled questions through one mode and aggregate a report.

    Per-question model errors are recorded as incorrect; the sweep continues.
    """
    if mode not in (MODE_LIVE, MODE_BASELINE):
        raise ValueError(f"unknown mode {mode!r}")
    selected = sample(questions, n, seed)
    latencies = mock_latencies or {}
    http_clients = {
        spec.id: HttpModelClient(spec)
        for spec in (cfg.inference_model, cfg.output_model)
        if spec.backend == "http"
    }

    def job(question: Question):
        return _evaluate_one(
            question, cfg, mode, chars_per_min, clock_mode, script_bank, latencies, http_clients
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, selected))
    else:
        outcomes = [job(q) for q in selected]

    rows = [row for row, _ in outcomes]
    if trace_dir is not None:
        trace_path = Path(trace_dir)
        trace_path.mkdir(parents=True, exist_ok=True)
        for (row, result), question in zip(outcomes, selected):
            if result is not None:
                out = trace_path / f"{question.id}.json"
                out.write_text(
                    json.dumps(result.to_dict(), indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8",
                )

    timed = [r for r in rows if r["latency_s"] is not None]

    def mean(key: str) -> float:
        return sum(r[key] for r in timed) / len(timed) if timed else 0.0

    config = {
        "mode": mode,
        "format": cfg.format.value,
        "granularity": cfg.granularity.value,
        "inference_model": cfg.inference_model.id,
        "output_model": cfg.output_model.id,
        "task_hint": cfg.task_hint,
        "poll_interval_s": cfg.poll_interval_s,
        "n": n,
        "seed": seed,
        "chars_per_min": chars_per_min,
        "clock": clock_mode,
        "workers": workers,
    }
    if config_echo:
        config.update(config_echo)
    return Report(
        config=config,
        per_question=rows,
        mean_latency_s=mean("latency_s"),
        mean_compute_s=mean("compute_s"),
        mean_input_s=mean("input_s"),
        accuracy_pct=100.0 * sum(1 for r in rows if r["correct"]) / len(rows) if rows else 0.0,
    )
