"""Simultaneous inference on streaming user input.

While a user is still typing, an inference model works on the stable part of
the input and caches intermediate conclusions; when the input completes, an
output model folds those conclusions into a final response, cutting the
latency the user actually perceives.
"""

from .clock import Clock, RealClock, VirtualClock
from .formatting import ChatMessage, PromptFormat, Stage, format_context, system_message
from .memory import Context, InferenceEntry, InferenceMemory
from .models import (
    Action,
    ActionKind,
    Completion,
    HttpModelClient,
    LatencyModel,
    MockModelClient,
    ModelRegistry,
    ModelSpec,
    parse_action,
)
from .orchestrator import (
    SessionConfig,
    SessionResult,
    StepRecord,
    run_baseline,
    run_session,
)
from .segmenter import Granularity, Segment, segment, stable_prefix
from .streams import LiveInputStream, SimulatedInputStream

__all__ = [
    "Action",
    "ActionKind",
    "ChatMessage",
    "Clock",
    "Completion",
    "Context",
    "Granularity",
    "HttpModelClient",
    "InferenceEntry",
    "InferenceMemory",
    "LatencyModel",
    "LiveInputStream",
    "MockModelClient",
    "ModelRegistry",
    "ModelSpec",
    "PromptFormat",
    "RealClock",
    "Segment",
    "SessionConfig",
    "SessionResult",
    "SimulatedInputStream",
    "Stage",
    "StepRecord",
    "VirtualClock",
    "format_context",
    "parse_action",
    "run_baseline",
    "run_session",
    "segment",
    "stable_prefix",
    "system_message",
]

__version__ = "0.1.0"
