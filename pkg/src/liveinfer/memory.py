"""Per-session cache of (input segments -> intermediate inference) entries.

Reads prefix-match the stored entries against the current stable segments;
the first mismatch (the user edited earlier input) evicts the mismatching
entry and everything after it, because later inferences depended on the
edited content. Matching is exact string equality on segment text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .segmenter import Segment


@dataclass(frozen=True)
class InferenceEntry:
    """One or more input segments and the inference made on them."""

    segments: tuple[Segment, ...]
    inference: str
    model_id: str = ""
    created_at: float = 0.0


@dataclass
class Context:
    """Memory read result: matched history plus uncovered new segments."""

    history: list[InferenceEntry] = field(default_factory=list)
    new_segments: list[Segment] = field(default_factory=list)

    @property
    def history_text(self) -> str:
        return "".join(s.text for e in self.history for s in e.segments)

    @property
    def new_text(self) -> str:
        return "".join(s.text for s in self.new_segments)


class InferenceMemory:
    """In-core, per-session, unbounded by default (inputs are short).

    Not shared across sessions; a single session task owns it. ``snapshot``
    copies state for UI observers.
    """

    def __init__(self, max_entries: int | None = None):
        if max_entries is not None and max_entries <= 0:
            raise ValueError("max_entries must be positive when set")
        self._entries: list[InferenceEntry] = []
        self._max_entries = max_entries
        self._evictions_total = 0

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> list[InferenceEntry]:
        return list(self._entries)

    @property
    def evictions_total(self) -> int:
        """Entries dropped by conflict truncation since construction."""
        return self._evictions_total

    def read(self, stable_segments: Sequence[Segment]) -> Context:
        """Match stored entries positionally against the stable segments.

        On the first conflicting entry, that entry and all later ones are
        evicted and matching stops. The returned context tiles the input:
        history segment texts followed by new segment texts equal the stable
        segment texts exactly.
        """
        texts = [s.text for s in stable_segments]
        matched = 0
        pos = 0
        for entry in self._entries:
            width = len(entry.segments)
            if pos + width > len(texts):
                break
            if [s.text for s in entry.segments] != texts[pos : pos + width]:
                break
            matched += 1
            pos += width
        if matched < len(self._entries):
            self._evictions_total += len(self._entries) - matched
            del self._entries[matched:]
        return Context(history=list(self._entries), new_segments=list(stable_segments[pos:]))

    def write(
        self,
        new_segments: Sequence[Segment],
        inference: str,
        model_id: str = "",
        created_at: float = 0.0,
    ) -> None:
        """Append one entry; rejects empty segments or an empty inference
        (wait actions are never stored)."""
        if not new_segments:
            raise ValueError("write requires at least one new segment")
        if not inference:
            raise ValueError("write requires a non-empty inference")
        self._entries.append(
            InferenceEntry(
                segments=tuple(new_segments),
                inference=inference,
                model_id=model_id,
                created_at=created_at,
            )
        )
        if self._max_entries is not None and len(self._entries) > self._max_entries:
            del self._entries[0]

    def clear(self) -> None:
        self._entries.clear()

    def snapshot(self) -> dict:
        """JSON-serializable copy for the service/UI event stream."""
        return {
            "entries": [
                {"segments": [s.text for s in e.segments], "inference": e.inference}
                for e in self._entries
            ]
        }
