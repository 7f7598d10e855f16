"""Monotonic clocks: real wall time and a virtual clock for deterministic runs.

A virtual clock is shared by one session's input stream and its mock model
clients, so "time spent generating" and "time spent typing" advance the same
timeline without any real sleeping.
"""

from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    def now(self) -> float:
        """Monotonic seconds."""
        ...

    def sleep(self, seconds: float) -> None:
        ...


class RealClock:
    """Wall-clock time via time.monotonic; sleep really sleeps."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class VirtualClock:
    """Deterministic clock: sleep() advances time instantly.

    Must be confined to a single session / worker; it is not thread-safe.
    """

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative duration")
        self._now += seconds
