"""Session loops: simultaneous inference on a streaming input, and the
conventional wait-for-everything baseline.

The simultaneous loop polls the stream, segments the visible text, reads the
inference memory for context, and either infers on the new stable segments
(streaming stage) or produces the final response (once the end-of-text signal
is up). At most one model call is ever in flight; a call running when the
user finishes completes and is recorded before the output stage runs.
User-perceived latency is the gap between end-of-text and the completion of
the final response.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .clock import Clock
from .formatting import ChatMessage, PromptFormat, Stage, format_context, messages_to_dicts
from .memory import Context, InferenceMemory
from .models import (
    Action,
    ActionKind,
    Completion,
    ModelClientError,
    ModelRegistry,
    ModelSpec,
    parse_action,
)
from .segmenter import Granularity, DEFAULT_ABBREVIATIONS, segment, stable_prefix
from .streams import InputStream, StreamAborted

BASELINE_SYSTEM_MESSAGE = (
    "Answer the question. Think step by step, then state your final answer."
)

# kind, payload -> None; used by the service layer to externalize progress.
Observer = Callable[[str, dict], None]


@dataclass(frozen=True)
class SessionConfig:
    granularity: Granularity
    format: PromptFormat
    inference_model: ModelSpec
    output_model: ModelSpec
    task_hint: str | None = None
    poll_interval_s: float = 0.05
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS

    def __post_init__(self):
        if self.poll_interval_s <= 0:
            raise ValueError("poll_interval_s must be positive")


@dataclass(frozen=True)
class StepRecord:
    stage: Stage
    action: Action
    prompt: list[ChatMessage]
    completion: Completion
    new_segment_texts: list[str]
    model_id: str

    def to_dict(self) -> dict:
        return {
            "stage": self.stage.value,
            "action": {"kind": self.action.kind.value, "text": self.action.text},
            "prompt": messages_to_dicts(self.prompt),
            "completion": {
                "text": self.completion.text,
                "tokens_in": self.completion.tokens_in,
                "tokens_out": self.completion.tokens_out,
                "t_start": self.completion.t_start,
                "t_end": self.completion.t_end,
                "busy_s": self.completion.busy_s,
            },
            "new_segment_texts": list(self.new_segment_texts),
            "model_id": self.model_id,
        }


@dataclass
class SessionResult:
    response: str
    latency_s: float
    compute_s: float
    input_s: float
    steps: list[StepRecord] = field(default_factory=list)

    def compute_by_model(self) -> dict[str, float]:
        busy: dict[str, float] = {}
        for step in self.steps:
            busy[step.model_id] = busy.get(step.model_id, 0.0) + step.completion.busy_s
        return busy

    def to_dict(self) -> dict:
        return {
            "response": self.response,
            "latency_s": self.latency_s,
            "compute_s": self.compute_s,
            "input_s": self.input_s,
            "steps": [step.to_dict() for step in self.steps],
        }

    def summary(self) -> dict:
        """Canonical reduced view; the service event stream carries enough to
        rebuild exactly this (checked in tests)."""
        return {
            "response": self.response,
            "latency_s": self.latency_s,
            "compute_s": self.compute_s,
            "input_s": self.input_s,
            "steps": [
                {
                    "stage": step.stage.value,
                    "kind": step.action.kind.value,
                    "text": step.completion.text,
                    "busy_s": step.completion.busy_s,
                    "model_id": step.model_id,
                    "new_segment_texts": list(step.new_segment_texts),
                }
                for step in self.steps
            ],
        }


class SessionStepError(Exception):
    """A model call failed; records which step of the session it was."""

    def __init__(self, step_index: int, stage: Stage, cause: ModelClientError):
        super().__init__(f"step {step_index} ({stage.value}) failed: {cause}")
        self.step_index = step_index
        self.stage = stage
        self.cause = cause


def _emit(observer: Observer | None, kind: str, payload: dict) -> None:
    if observer is not None:
        observer(kind, payload)


def run_session(
    stream: InputStream,
    cfg: SessionConfig,
    registry: ModelRegistry,
    clock: Clock,
    observer: Observer | None = None,
    memory: InferenceMemory | None = None,
) -> SessionResult:
    """Simultaneous-inference session over the whole life of the stream."""
    inference_client = registry.resolve(cfg.inference_model)
    output_client = registry.resolve(cfg.output_model)
    memory = memory if memory is not None else InferenceMemory()
    steps: list[StepRecord] = []

    last_text: str | None = None
    segments = []
    stable_seen = 0
    evictions_seen = memory.evictions_total
    # After a wait action, hold off until the stable segments change; calling
    # again on identical input would deterministically wait again.
    wait_key: tuple[str, ...] | None = None

    while True:
        if stream.aborted:
            raise StreamAborted("input stream aborted")
        text, end_of_text = stream.poll()
        if text != last_text:
            segments = segment(text, cfg.granularity, cfg.abbreviations)
            last_text = text
        stable = stable_prefix(segments, end_of_text)

        if len(stable) < stable_seen:
            stable_seen = len(stable)
        for seg in stable[stable_seen:]:
            _emit(observer, "segment_stable", {"index": seg.index, "text": seg.text})
        stable_seen = len(stable)

        ctx = memory.read(stable)
        if memory.evictions_total > evictions_seen:
            _emit(
                observer,
                "metrics",
                {
                    "memory_truncated": memory.evictions_total - evictions_seen,
                    "entries_remaining": len(memory),
                },
            )
            evictions_seen = memory.evictions_total

        if end_of_text:
            step = _call_model(
                output_client, ctx, cfg, Stage.OUTPUT, steps, observer, task_hint=cfg.task_hint
            )
            steps.append(step)
            result = SessionResult(
                response=step.completion.text,
                latency_s=step.completion.t_end - stream.t_end,
                compute_s=sum(s.completion.busy_s for s in steps),
                input_s=stream.input_s,
                steps=steps,
            )
            _emit(
                observer,
                "final_response",
                {
                    "text": result.response,
                    "busy_s": step.completion.busy_s,
                    "model_id": step.model_id,
                },
            )
            _emit(
                observer,
                "metrics",
                {
                    "latency_s": result.latency_s,
                    "compute_s": result.compute_s,
                    "input_s": result.input_s,
                    "steps": len(steps),
                },
            )
            return result

        new_texts = tuple(s.text for s in ctx.new_segments)
        if not ctx.new_segments or (wait_key is not None and new_texts == wait_key):
            clock.sleep(cfg.poll_interval_s)
            continue

        step = _call_model(inference_client, ctx, cfg, Stage.INFERENCE, steps, observer)
        steps.append(step)
        if step.action.kind is ActionKind.INFERENCE:
            memory.write(
                ctx.new_segments,
                step.action.text,
                model_id=step.model_id,
                created_at=step.completion.t_end,
            )
            wait_key = None
            _emit(
                observer,
                "inference_done",
                {
                    "entry_index": len(memory) - 1,
                    "inference_text": step.action.text,
                    "busy_s": step.completion.busy_s,
                    "segment_texts": list(step.new_segment_texts),
                    "model_id": step.model_id,
                },
            )
        else:
            wait_key = new_texts
            _emit(
                observer,
                "wait",
                {
                    "step_index": len(steps) - 1,
                    "text": step.completion.text,
                    "busy_s": step.completion.busy_s,
                    "new_segment_texts": list(step.new_segment_texts),
                    "model_id": step.model_id,
                },
            )


def _call_model(
    client,
    ctx: Context,
    cfg: SessionConfig,
    stage: Stage,
    steps: list[StepRecord],
    observer: Observer | None,
    task_hint: str | None = None,
) -> StepRecord:
    prompt = format_context(ctx, cfg.format, stage, task_hint)
    new_texts = [s.text for s in ctx.new_segments]
    kind = "output_started" if stage is Stage.OUTPUT else "inference_started"
    _emit(observer, kind, {"step_index": len(steps), "new_segment_texts": new_texts})
    try:
        completion = client.chat(prompt)
    except ModelClientError as exc:
        raise SessionStepError(len(steps), stage, exc) from exc
    action = parse_action(completion, stage)
    return StepRecord(
        stage=stage,
        action=action,
        prompt=prompt,
        completion=completion,
        new_segment_texts=new_texts,
        model_id=client.spec.id,
    )


def run_baseline(
    stream: InputStream,
    cfg: SessionConfig,
    registry: ModelRegistry,
    clock: Clock,
) -> SessionResult:
    """Conventional inference: wait for the complete input, answer once.

    Latency is the single call's wall duration, so compute and latency
    coincide by construction.
    """
    output_client = registry.resolve(cfg.output_model)
    while True:
        if stream.aborted:
            raise StreamAborted("input stream aborted")
        text, end_of_text = stream.poll()
        if end_of_text:
            break
        clock.sleep(cfg.poll_interval_s)

    system = BASELINE_SYSTEM_MESSAGE
    if cfg.task_hint:
        system = f"{system}\n\n{cfg.task_hint}"
    prompt = [ChatMessage("system", system), ChatMessage("user", text)]
    try:
        completion = output_client.chat(prompt)
    except ModelClientError as exc:
        raise SessionStepError(0, Stage.OUTPUT, exc) from exc
    action = parse_action(completion, Stage.OUTPUT)
    step = StepRecord(
        stage=Stage.OUTPUT,
        action=action,
        prompt=prompt,
        completion=completion,
        new_segment_texts=[text],
        model_id=output_client.spec.id,
    )
    return SessionResult(
        response=completion.text,
        latency_s=completion.t_end - completion.t_start,
        compute_s=completion.busy_s,
        input_s=stream.input_s,
        steps=[step],
    )
