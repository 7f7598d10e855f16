"""Render a memory context into role-tagged chat messages.

Five layouts arrange previous input segments (P), previous inferences (I) and
the new, not yet processed segments (N) across user/assistant messages; two
system messages select between the streaming-input stage and the final-output
stage. Rendering is deterministic: identical inputs produce byte-identical
messages, which golden tests pin down.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable

from .memory import Context

INFERENCE_SYSTEM_MESSAGE = (
    "You are assisting with a task whose input is still streaming in. "
    "Based on the new input, either make a concise temporary inference that "
    "will help solve the task later, or reply with exactly the single word: wait."
)
OUTPUT_SYSTEM_MESSAGE = (
    "The user's input is now complete. Using the input and your previous "
    "inferences, give the final response to the user."
)

# Rendered in place of the new-input block when the input ended exactly on a
# segment boundary and nothing is left to show; the session must still answer.
INPUT_COMPLETE_PLACEHOLDER = "(input complete)"


class PromptFormat(enum.Enum):
    U_PI = "U-PI"
    U_PIL = "U-PIL"
    UA_PIL = "UA-PIL"
    U_SPI = "U-SPI"
    UA_SPI = "UA-SPI"

    @classmethod
    def parse(cls, name: str) -> "PromptFormat":
        normalized = name.strip().upper().replace("_", "-")
        if normalized == "U-PLI":  # widely seen alternate spelling of U-PIL
            normalized = "U-PIL"
        for fmt in cls:
            if fmt.value == normalized:
                return fmt
        valid = ", ".join(f.value for f in cls)
        raise ValueError(f"unknown prompt format {name!r} (expected one of: {valid})")


class Stage(enum.Enum):
    INFERENCE = "inference"
    OUTPUT = "output"


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str


def system_message(stage: Stage, task_hint: str | None = None) -> ChatMessage:
    """Stage-specific system message; a task hint is appended as a paragraph."""
    content = INFERENCE_SYSTEM_MESSAGE if stage is Stage.INFERENCE else OUTPUT_SYSTEM_MESSAGE
    if task_hint:
        content = f"{content}\n\n{task_hint}"
    return ChatMessage(role="system", content=content)


def format_context(
    ctx: Context,
    fmt: PromptFormat,
    stage: Stage,
    task_hint: str | None = None,
) -> list[ChatMessage]:
    """Render context into messages, starting with the stage system message."""
    if stage is Stage.INFERENCE and not ctx.new_segments:
        raise ValueError("inference stage requires at least one new segment")

    prompts = ["".join(s.text for s in e.segments) for e in ctx.history]
    inferences = [e.inference for e in ctx.history]
    new_text = ctx.new_text
    if stage is Stage.OUTPUT and not new_text:
        new_text = INPUT_COMPLETE_PLACEHOLDER

    messages = [system_message(stage, task_hint)]
    messages.extend(_render(fmt, prompts, inferences, new_text))
    return messages


def _render(
    fmt: PromptFormat, prompts: list[str], inferences: list[str], new_text: str
) -> list[ChatMessage]:
    k = len(prompts)
    joined_prompts = "".join(prompts)
    joined_inferences = "\n".join(inferences)

    if fmt is PromptFormat.U_PI:
        content = f"[Input]\n{joined_prompts}{new_text}"
        if k:
            content += f"\n[Previous inferences]\n{joined_inferences}"
        return [ChatMessage("user", content)]

    if fmt is PromptFormat.U_PIL:
        blocks = []
        if k:
            blocks.append(f"[Previous input]\n{joined_prompts}")
            blocks.append(f"[Previous inferences]\n{joined_inferences}")
        blocks.append(f"[New input]\n{new_text}")
        return [ChatMessage("user", "\n".join(blocks))]

    if fmt is PromptFormat.UA_PIL:
        messages = []
        if k:
            messages.append(ChatMessage("user", f"[Previous input]\n{joined_prompts}"))
            messages.append(ChatMessage("assistant", joined_inferences))
        messages.append(ChatMessage("user", f"[New input]\n{new_text}"))
        return messages

    if fmt is PromptFormat.U_SPI:
        blocks = []
        for i, (prompt, inference) in enumerate(zip(prompts, inferences), start=1):
            blocks.append(f"[Input {i}]\n{prompt}\n[Inference {i}]\n{inference}")
        blocks.append(f"[New input]\n{new_text}")
        return [ChatMessage("user", "\n".join(blocks))]

    if fmt is PromptFormat.UA_SPI:
        messages = []
        for prompt, inference in zip(prompts, inferences):
            messages.append(ChatMessage("user", prompt))
            messages.append(ChatMessage("assistant", inference))
        messages.append(ChatMessage("user", new_text))
        return messages

    raise AssertionError(f"unhandled format: {fmt}")


def messages_to_dicts(messages: Iterable[ChatMessage]) -> list[dict]:
    return [{"role": m.role, "content": m.content} for m in messages]


def messages_to_json(messages: Iterable[ChatMessage], indent: int | None = 2) -> str:
    """Dump messages as a JSON array of {role, content} for debugging/goldens."""
    return json.dumps(messages_to_dicts(messages), indent=indent, ensure_ascii=False)


def messages_from_dicts(payload: Iterable[dict]) -> list[ChatMessage]:
    return [ChatMessage(role=d["role"], content=d["content"]) for d in payload]
