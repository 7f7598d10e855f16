"""HTTP service for live sessions: feed keystrokes in, stream events out.

One orchestrator thread per session polls a live input stream while POSTed
edits mutate it; every step of the session is appended to an event log that
subscribers replay over server-sent events. The event log alone is enough to
reconstruct the session result (see ``reconstruct_summary``), which tests
hold the service to.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import httpx
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse

from .clock import RealClock
from .config import RunConfig
from .formatting import PromptFormat
from .memory import InferenceMemory
from .models import HttpModelClient, MockModelClient, ModelRegistry, ModelSpec
from .orchestrator import SessionConfig, SessionResult, run_session
from .segmenter import Granularity
from .streams import LiveInputStream

SESSION_TTL_S = 600.0  # drop sessions 10 minutes after their terminal event

# A live demo session should not die of script exhaustion; the configured
# mock script is repeated this many times per session.
MOCK_SCRIPT_REPEATS = 64


class EventLog:
    """Append-only, fan-out-safe event log with strictly increasing t."""

    def __init__(self, clock: RealClock | None = None):
        self._clock = clock or RealClock()
        self._t0 = self._clock.now()
        self._events: list[dict] = []
        self._cond = threading.Condition()
        self._closed = False

    def append(self, kind: str, payload: dict) -> None:
        with self._cond:
            t = self._clock.now() - self._t0
            if self._events and t <= self._events[-1]["t"]:
                t = self._events[-1]["t"] + 1e-9
            self._events.append({"kind": kind, "payload": payload, "t": t})
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    def snapshot(self) -> list[dict]:
        with self._cond:
            return list(self._events)

    def subscribe(self) -> Iterator[dict]:
        """Replays all past events, then streams until the log closes."""
        index = 0
        while True:
            with self._cond:
                while index >= len(self._events) and not self._closed:
                    self._cond.wait(timeout=0.5)
                if index < len(self._events):
                    event = self._events[index]
                    index += 1
                else:  # closed and drained
                    return
            yield event


@dataclass
class Session:
    id: str
    stream: LiveInputStream
    log: EventLog
    config: SessionConfig
    thread: threading.Thread | None = None
    result: SessionResult | None = None
    error: str | None = None
    terminal_at: float | None = None
    memory: InferenceMemory = field(default_factory=InferenceMemory)

    @property
    def finished(self) -> bool:
        return self.terminal_at is not None


class SessionManager:
    def __init__(self, run_config: RunConfig, ttl_s: float = SESSION_TTL_S):
        self.run_config = run_config
        self.ttl_s = ttl_s
        self.sessions: dict[str, Session] = {}
        self._clock = RealClock()
        self._lock = threading.Lock()
        self._mock_scripts: dict[str, list[str]] = dict(run_config.mock_scripts)

    # -- session lifecycle -------------------------------------------------

    def create(self, body: dict) -> Session:
        cfg = self._parse_session_config(body)
        self._check_reachable(cfg.inference_model)
        self._check_reachable(cfg.output_model)
        registry = self._build_registry(cfg)

        session = Session(
            id=uuid.uuid4().hex[:16],
            stream=LiveInputStream(self._clock),
            log=EventLog(self._clock),
            config=cfg,
        )

        def observer(kind: str, payload: dict) -> None:
            session.log.append(kind, payload)

        def run() -> None:
            try:
                session.result = run_session(
                    session.stream,
                    cfg,
                    registry,
                    self._clock,
                    observer=observer,
                    memory=session.memory,
                )
            except Exception as exc:  # noqa: BLE001 - surfaced as an error event
                session.error = str(exc)
                session.log.append("error", {"message": str(exc)})
            finally:
                session.terminal_at = self._clock.now()
                session.log.close()

        session.thread = threading.Thread(target=run, daemon=True, name=f"session-{session.id}")
        session.thread.start()
        with self._lock:
            self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        self.purge()
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def purge(self) -> None:
        now = self._clock.now()
        with self._lock:
            expired = [
                sid
                for sid, s in self.sessions.items()
                if s.terminal_at is not None and now - s.terminal_at > self.ttl_s
            ]
            for sid in expired:
                del self.sessions[sid]

    # -- config plumbing ---------------------------------------------------

    def _parse_session_config(self, body: dict) -> SessionConfig:
        def bad(fieldname: str, message: str) -> HTTPException:
            return HTTPException(status_code=400, detail={"field": fieldname, "message": message})

        if not isinstance(body, dict):
            raise bad("body", "expected a JSON object")
        try:
            granularity = Granularity.parse(body.get("granularity", "sentence"))
        except ValueError as exc:
            raise bad("granularity", str(exc)) from exc
        try:
            fmt = PromptFormat.parse(body.get("format", "UA-SPI"))
        except ValueError as exc:
            raise bad("format", str(exc)) from exc

        models = self.run_config.models
        defaults = {
            "inference_model": self.run_config.inference_model,
            "output_model": self.run_config.output_model,
        }
        specs = {}
        for key in ("inference_model", "output_model"):
            model_id = body.get(key) or defaults[key]
            if not model_id:
                raise bad(key, "no model configured")
            if model_id not in models:
                raise bad(key, f"unknown model id {model_id!r}")
            specs[key] = models[model_id]

        poll = body.get("poll_interval_s", self.run_config.poll_interval_s)
        try:
            poll = float(poll)
            if poll <= 0:
                raise ValueError("must be positive")
        except (TypeError, ValueError) as exc:
            raise bad("poll_interval_s", str(exc)) from exc

        return SessionConfig(
            granularity=granularity,
            format=fmt,
            inference_model=specs["inference_model"],
            output_model=specs["output_model"],
            task_hint=body.get("task_hint", self.run_config.task_hint),
            poll_interval_s=poll,
        )

    def _check_reachable(self, spec: ModelSpec) -> None:
        if spec.backend == "mock":
            if spec.id not in self._mock_scripts:
                raise HTTPException(
                    status_code=503,
                    detail=f"mock model {spec.id!r} has no script configured",
                )
            return
        try:
            httpx.get(f"{spec.endpoint_url.rstrip('/')}/models", timeout=2.0)
        except httpx.TransportError as exc:
            raise HTTPException(
                status_code=503, detail=f"model backend {spec.id!r} unreachable: {exc}"
            ) from exc

    def _build_registry(self, cfg: SessionConfig) -> ModelRegistry:
        registry = ModelRegistry()
        for spec in {cfg.inference_model.id: cfg.inference_model,
                     cfg.output_model.id: cfg.output_model}.values():
            if spec.backend == "mock":
                script = self._mock_scripts[spec.id] * MOCK_SCRIPT_REPEATS
                latency = self.run_config.mock_latencies.get(spec.id)
                registry.add(MockModelClient(spec, script, latency, self._clock))
            else:
                registry.add(HttpModelClient(spec))
        return registry


def reconstruct_summary(events: list[dict]) -> dict:
    """Fold an event stream back into a SessionResult summary.

    Must produce exactly ``SessionResult.summary()`` for the same session;
    the conformance test asserts equality.
    """
    steps = []
    response = None
    latency_s = compute_s = input_s = None
    pending_new: list[str] = []
    for event in events:
        kind, payload = event["kind"], event["payload"]
        if kind in ("inference_started", "output_started"):
            pending_new = list(payload["new_segment_texts"])
        elif kind == "inference_done":
            steps.append(
                {
                    "stage": "inference",
                    "kind": "inference",
                    "text": payload["inference_text"],
                    "busy_s": payload["busy_s"],
                    "model_id": payload["model_id"],
                    "new_segment_texts": list(payload["segment_texts"]),
                }
            )
        elif kind == "wait":
            steps.append(
                {
                    "stage": "inference",
                    "kind": "wait",
                    "text": payload["text"],
                    "busy_s": payload["busy_s"],
                    "model_id": payload["model_id"],
                    "new_segment_texts": list(payload["new_segment_texts"]),
                }
            )
        elif kind == "final_response":
            response = payload["text"]
            steps.append(
                {
                    "stage": "output",
                    "kind": "final",
                    "text": payload["text"],
                    "busy_s": payload["busy_s"],
                    "model_id": payload["model_id"],
                    "new_segment_texts": pending_new,
                }
            )
        elif kind == "metrics" and "latency_s" in payload:
            latency_s = payload["latency_s"]
            compute_s = payload["compute_s"]
            input_s = payload["input_s"]
    return {
        "response": response,
        "latency_s": latency_s,
        "compute_s": compute_s,
        "input_s": input_s,
        "steps": steps,
    }


def build_app(run_config: RunConfig, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="liveinfer service")
    manager = SessionManager(run_config)
    app.state.manager = manager

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.get("/config")
    def config() -> dict:
        return {
            "formats": [f.value for f in PromptFormat],
            "granularities": [g.value for g in Granularity],
            "models": sorted(run_config.models),
            "defaults": {
                "format": run_config.format.value,
                "granularity": run_config.granularity.value,
                "inference_model": run_config.inference_model,
                "output_model": run_config.output_model,
            },
        }

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request) -> dict:
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"invalid JSON body: {exc}") from exc
        session = manager.create(body)
        return {"session_id": session.id}

    @app.post("/sessions/{session_id}/feed")
    def feed(session_id: str, edit: dict) -> dict:
        session = manager.get(session_id)
        op = edit.get("op")
        try:
            if op == "append":
                visible = session.stream.append(str(edit.get("text", "")))
            elif op == "backspace":
                visible = session.stream.backspace(int(edit.get("count", 1)))
            elif op == "finish":
                session.stream.finish()
                visible = len(session.stream.poll()[0])
            else:
                raise HTTPException(
                    status_code=400,
                    detail={"field": "op", "message": f"unknown edit op {op!r}"},
                )
        except RuntimeError as exc:  # edits after finish
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        text, end_of_text = session.stream.poll()
        session.log.append(
            "char_visible", {"visible_text": text, "end_of_text": end_of_text}
        )
        return {"visible_len": visible}

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str) -> StreamingResponse:
        session = manager.get(session_id)

        def sse() -> Iterator[str]:
            for event in session.log.subscribe():
                yield f"data: {json.dumps(event, ensure_ascii=False)}\n\n"

        return StreamingResponse(sse(), media_type="text/event-stream")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        # mounted last so API routes keep precedence; serves index.html at /
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
