"""Chat-completion clients: an OpenAI-compatible HTTP backend and a
deterministic scripted mock with a linear latency model.

The mock exists so sessions and benchmarks run bit-reproducibly on a virtual
clock: token counts derive from character counts, and each call occupies the
model for ``overhead + prefill*tokens_in + decode*tokens_out`` seconds of
clock time (really slept on a real clock, instantly advanced on a virtual
one).
"""

from __future__ import annotations

import enum
import json
import math
import os
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import httpx

from .clock import Clock, RealClock
from .formatting import ChatMessage, Stage, messages_to_dicts


@dataclass(frozen=True)
class ModelSpec:
    id: str
    backend: str = "mock"  # mock | http
    endpoint_url: str | None = None
    api_key_env: str | None = None
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if self.backend not in ("mock", "http"):
            raise ValueError(f"unknown backend {self.backend!r} for model {self.id!r}")
        if self.backend == "http" and not self.endpoint_url:
            raise ValueError(f"http model {self.id!r} requires endpoint_url")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class LatencyModel:
    """Linear occupancy model for the mock backend; all coefficients >= 0."""

    prefill_s_per_token: float = 0.0
    decode_s_per_token: float = 0.0
    fixed_overhead_s: float = 0.0
    chars_per_token: float = 4.0

    def __post_init__(self):
        for name in ("prefill_s_per_token", "decode_s_per_token", "fixed_overhead_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.chars_per_token <= 0:
            raise ValueError("chars_per_token must be positive")

    def tokens(self, chars: int) -> int:
        return math.ceil(chars / self.chars_per_token)

    def busy_seconds(self, tokens_in: int, tokens_out: int) -> float:
        return (
            self.fixed_overhead_s
            + self.prefill_s_per_token * tokens_in
            + self.decode_s_per_token * tokens_out
        )


@dataclass(frozen=True)
class Completion:
    text: str
    tokens_in: int
    tokens_out: int
    t_start: float
    t_end: float
    busy_s: float


class ActionKind(enum.Enum):
    INFERENCE = "inference"
    WAIT = "wait"
    FINAL = "final"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    text: str | None = None

    def __post_init__(self):
        if self.kind is ActionKind.WAIT and self.text is not None:
            raise ValueError("wait actions carry no text")


def parse_action(completion: Completion, stage: Stage) -> Action:
    """Classify a completion: the output stage always yields a final answer;
    in the streaming stage the literal word "wait" (alone, or starting a
    sentence as "wait." / "wait,") declines to infer."""
    if stage is Stage.OUTPUT:
        return Action(ActionKind.FINAL, completion.text)
    trimmed = completion.text.strip().lower()
    if trimmed == "wait" or trimmed.startswith("wait.") or trimmed.startswith("wait,"):
        return Action(ActionKind.WAIT)
    return Action(ActionKind.INFERENCE, completion.text)


class ModelClientError(Exception):
    """Base for client failures; carries the request id for correlation."""

    def __init__(self, message: str, request_id: str):
        super().__init__(f"{message} [request {request_id}]")
        self.request_id = request_id


class TransportError(ModelClientError):
    pass


class StatusError(ModelClientError):
    def __init__(self, message: str, request_id: str, status_code: int):
        super().__init__(message, request_id)
        self.status_code = status_code


class MalformedResponseError(ModelClientError):
    pass


class ScriptExhaustedError(ModelClientError):
    pass


def load_script(path: str | Path) -> list[str]:
    """Mock script file: JSONL, one {"response": "..."} per line, in order."""
    responses = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            responses.append(obj["response"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: malformed script line: {exc}") from exc
    return responses


def _content_chars(messages: Sequence[ChatMessage]) -> int:
    return sum(len(m.content) for m in messages)


class MockModelClient:
    """Replays a scripted response per call and simulates occupancy time."""

    def __init__(
        self,
        spec: ModelSpec,
        script: Sequence[str],
        latency: LatencyModel | None = None,
        clock: Clock | None = None,
    ):
        if spec.backend != "mock":
            raise ValueError(f"model {spec.id!r} is not a mock backend")
        self.spec = spec
        self.latency = latency or LatencyModel()
        self.clock = clock or RealClock()
        self._script = list(script)
        self._cursor = 0

    @property
    def remaining(self) -> int:
        return len(self._script) - self._cursor

    def chat(self, messages: Sequence[ChatMessage]) -> Completion:
        request_id = uuid.uuid4().hex[:12]
        if not messages or messages[0].role != "system":
            raise ValueError("messages must be non-empty and start with a system message")
        if self._cursor >= len(self._script):
            raise ScriptExhaustedError(
                f"mock script for model {self.spec.id!r} exhausted after "
                f"{self._cursor} responses",
                request_id,
            )
        text = self._script[self._cursor]
        self._cursor += 1
        tokens_in = self.latency.tokens(_content_chars(messages))
        tokens_out = self.latency.tokens(len(text))
        busy = self.latency.busy_seconds(tokens_in, tokens_out)
        t_start = self.clock.now()
        self.clock.sleep(busy)
        t_end = self.clock.now()
        return Completion(
            text=text,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            t_start=t_start,
            t_end=t_end,
            busy_s=t_end - t_start,
        )


class HttpModelClient:
    """POSTs to an OpenAI-compatible /chat/completions endpoint.

    One retry on transient transport failure, then the error surfaces; the
    API key comes from the env var the ModelSpec names and is sent as a
    bearer token.
    """

    def __init__(
        self,
        spec: ModelSpec,
        clock: Clock | None = None,
        timeout_s: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        if spec.backend != "http":
            raise ValueError(f"model {spec.id!r} is not an http backend")
        self.spec = spec
        self.clock = clock or RealClock()
        headers = {}
        api_key = os.environ.get(spec.api_key_env, "") if spec.api_key_env else ""
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._http = httpx.Client(
            base_url=spec.endpoint_url.rstrip("/"),
            headers=headers,
            timeout=timeout_s,
            transport=transport,
        )

    def chat(self, messages: Sequence[ChatMessage]) -> Completion:
        request_id = uuid.uuid4().hex[:12]
        if not messages or messages[0].role != "system":
            raise ValueError("messages must be non-empty and start with a system message")
        body = {
            "model": self.spec.id,
            "messages": messages_to_dicts(messages),
            "temperature": self.spec.temperature,
            "max_tokens": self.spec.max_tokens,
        }
        t_start = self.clock.now()
        response = self._post_with_retry(body, request_id)
        t_end = self.clock.now()
        if response.status_code // 100 != 2:
            raise StatusError(
                f"model {self.spec.id!r} returned HTTP {response.status_code}: "
                f"{response.text[:200]}",
                request_id,
                response.status_code,
            )
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, LookupError, TypeError) as exc:
            raise MalformedResponseError(
                f"model {self.spec.id!r} returned an unparseable body: {exc}", request_id
            ) from exc
        usage = payload.get("usage") or {}
        # Endpoint-reported usage wins; estimate by chars/4 when absent.
        tokens_in = usage.get("prompt_tokens", math.ceil(_content_chars(messages) / 4))
        tokens_out = usage.get("completion_tokens", math.ceil(len(text) / 4))
        return Completion(
            text=text,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            t_start=t_start,
            t_end=t_end,
            busy_s=t_end - t_start,
        )

    def _post_with_retry(self, body: dict, request_id: str) -> httpx.Response:
        last_error = None
        for _attempt in range(2):
            try:
                return self._http.post("/chat/completions", json=body)
            except httpx.TransportError as exc:
                last_error = exc
        raise TransportError(
            f"model {self.spec.id!r} unreachable: {last_error}", request_id
        ) from last_error

    def close(self) -> None:
        self._http.close()


ModelClient = MockModelClient | HttpModelClient


@dataclass
class ModelRegistry:
    """Resolves model specs to ready-to-call clients, one per model id."""

    clients: dict[str, ModelClient] = field(default_factory=dict)

    def add(self, client: ModelClient) -> None:
        self.clients[client.spec.id] = client

    def resolve(self, spec: ModelSpec) -> ModelClient:
        try:
            return self.clients[spec.id]
        except KeyError:
            raise KeyError(f"no client registered for model {spec.id!r}") from None
