"""Streaming text sources: a paced simulator and a live keystroke-fed stream.

The simulator releases one character every 60/chars_per_min seconds on its
clock and raises the end-of-text flag immediately after the last character;
on a virtual clock the whole schedule is deterministic. The live stream is
mutated by a producer (append/backspace/finish) while a session task polls
it; polls always return a consistent snapshot.
"""

from __future__ import annotations

import threading

from .clock import Clock, RealClock


class StreamAborted(Exception):
    """The producer abandoned the stream; the session must stop."""


class SimulatedInputStream:
    """Append-only stream paced at a fixed characters-per-minute rate."""

    source = "simulated"

    def __init__(self, text: str, chars_per_min: float, clock: Clock):
        if not text:
            raise ValueError("simulated stream requires non-empty text")
        if chars_per_min <= 0:
            raise ValueError("chars_per_min must be positive")
        self.text = text
        self.clock = clock
        self.seconds_per_char = 60.0 / chars_per_min
        self.t_start = clock.now()
        # End-of-text fires exactly when the last character lands.
        self.t_end = self.t_start + len(text) * self.seconds_per_char
        self.aborted = False

    @property
    def input_s(self) -> float:
        return len(self.text) * self.seconds_per_char

    def poll(self) -> tuple[str, bool]:
        elapsed = self.clock.now() - self.t_start
        # Epsilon guards float drift from accumulated virtual-clock sleeps.
        visible = int(elapsed / self.seconds_per_char + 1e-9)
        if visible >= len(self.text):
            return self.text, True
        return self.text[:visible], False


class LiveInputStream:
    """Keystroke-fed stream; finish() raises end-of-text exactly once."""

    source = "live"

    def __init__(self, clock: Clock | None = None):
        self.clock = clock or RealClock()
        self._lock = threading.Lock()
        self._text = ""
        self._finished = False
        self.t_start = self.clock.now()
        self.t_end: float | None = None
        self.aborted = False

    def poll(self) -> tuple[str, bool]:
        with self._lock:
            return self._text, self._finished

    @property
    def input_s(self) -> float:
        if self.t_end is None:
            raise RuntimeError("input duration is undefined before finish()")
        return self.t_end - self.t_start

    def append(self, text: str) -> int:
        """Returns the visible length after the edit."""
        with self._lock:
            self._require_open()
            self._text += text
            return len(self._text)

    def backspace(self, count: int) -> int:
        if count < 0:
            raise ValueError("backspace count must be >= 0")
        with self._lock:
            self._require_open()
            self._text = self._text[: max(0, len(self._text) - count)]
            return len(self._text)

    def finish(self) -> None:
        with self._lock:
            self._require_open()
            self._finished = True
            self.t_end = self.clock.now()

    def abort(self) -> None:
        with self._lock:
            self.aborted = True

    def _require_open(self) -> None:
        if self._finished:
            raise RuntimeError("stream already finished; no further edits allowed")


InputStream = SimulatedInputStream | LiveInputStream
