"""Split streaming text into segments and separate stable from unstable ones.

Segmentation is lossless: concatenating the returned segment texts always
reproduces the input exactly, because every split point assigns whitespace to
the *following* segment. That property is what lets downstream prompts carry
the verbatim user input.

Sentence boundaries are purely rule-based (terminal punctuation followed by
whitespace, with an abbreviation/initial suppression list) so that segment
goldens are portable and need no learned model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

_TERMINALS = ".!?"
_CLAUSE_MARKS = ",;:"

# Matched case-sensitively against the token ending at a candidate period.
DEFAULT_ABBREVIATIONS = frozenset(
    {"Mr.", "Dr.", "e.g.", "i.e.", "etc.", "vs.", "Fig.", "Eq.", "No.", "St."}
)


class Granularity(enum.Enum):
    """Segment size, ordered sentence > clause > word > char by coarseness."""

    SENTENCE = "sentence"
    CLAUSE = "clause"
    WORD = "word"
    CHAR = "char"

    @property
    def coarseness(self) -> int:
        return _COARSENESS[self]

    @classmethod
    def parse(cls, name: str) -> "Granularity":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(g.value for g in cls)
            raise ValueError(f"unknown granularity {name!r} (expected one of: {valid})") from None


_COARSENESS = {
    Granularity.SENTENCE: 3,
    Granularity.CLAUSE: 2,
    Granularity.WORD: 1,
    Granularity.CHAR: 0,
}


@dataclass(frozen=True)
class Segment:
    """An indexed, lossless slice of the input text."""

    index: int
    text: str


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Load an abbreviation list: one entry per line, UTF-8, blanks skipped."""
    entries = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        entry = line.strip()
        if entry:
            entries.add(entry)
    return frozenset(entries)


def _token_before(text: str, punct_index: int) -> str:
    """The whitespace-delimited token ending at text[punct_index], with any
    leading non-letter/digit characters (quotes, brackets) stripped."""
    start = punct_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : punct_index + 1]
    while token and not (token[0].isalpha() or token[0].isdigit()):
        token = token[1:]
    return token


def _suppress_period(text: str, punct_index: int, abbreviations: frozenset[str]) -> bool:
    token = _token_before(text, punct_index)
    if token in abbreviations:
        return True
    # Single-letter initials such as "J." in "J. Smith".
    return len(token) == 2 and token[0].isalpha()


def _boundaries(text: str, granularity: Granularity, abbreviations: frozenset[str]) -> list[int]:
    """Split positions: a boundary at i means a new segment starts at text[i]."""
    n = len(text)
    if granularity is Granularity.CHAR:
        return list(range(1, n))
    if granularity is Granularity.WORD:
        return [i for i in range(1, n) if text[i].isspace() and not text[i - 1].isspace()]

    bounds = []
    for i in range(n - 1):
        ch = text[i]
        if not text[i + 1].isspace():
            continue
        if ch in _TERMINALS:
            if ch == "." and _suppress_period(text, i, abbreviations):
                continue
            bounds.append(i + 1)
        elif granularity is Granularity.CLAUSE and ch in _CLAUSE_MARKS:
            bounds.append(i + 1)
    return bounds


def segment(
    text: str,
    granularity: Granularity,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> list[Segment]:
    """Split text losslessly into consecutively indexed segments.

    Sentence mode splits after ``. ! ?`` followed by whitespace, except after
    abbreviation-list entries and single-letter initials; clause mode
    additionally splits after ``, ; :`` followed by whitespace; word mode
    splits before each whitespace run; char mode yields one segment per
    character. Whitespace always stays with the following segment.
    """
    if not text:
        return []
    bounds = _boundaries(text, granularity, abbreviations)
    segments = []
    start = 0
    for bound in bounds:
        segments.append(Segment(index=len(segments), text=text[start:bound]))
        start = bound
    segments.append(Segment(index=len(segments), text=text[start:]))
    return segments


def stable_prefix(segments: Sequence[Segment], end_of_text: bool) -> list[Segment]:
    """All segments assumed immutable: everything once the input is complete,
    otherwise everything but the trailing (still growing) segment."""
    if end_of_text:
        return list(segments)
    return list(segments[:-1])


def concat_text(segments: Iterable[Segment]) -> str:
    return "".join(s.text for s in segments)
