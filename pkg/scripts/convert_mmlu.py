#!/usr/bin/env python3
"""Convert multiple-choice CSV files to the benchmark's JSONL question format.

Works on the classic headerless layout used by MMLU-style distributions:
    question, option A, option B, ..., answer letter
The category is taken from the file name (e.g. high_school_law_test.csv ->
"high school law").

Usage:
    python3 scripts/convert_mmlu.py out.jsonl input1.csv [input2.csv ...]

Kept outside the package on purpose: the core stays free of dataset-hosting
concerns.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path


def category_of(path: Path) -> str:
    return path.stem.removesuffix("_test").removesuffix("_val").replace("_", " ")


def convert(csv_path: Path, start_index: int) -> list[dict]:
    category = category_of(csv_path)
    questions = []
    with open(csv_path, newline="", encoding="utf-8") as handle:
        for row in csv.reader(handle):
            if len(row) < 4:
                raise ValueError(f"{csv_path}: row too short: {row!r}")
            question, *options, answer = row
            answer = answer.strip().upper()
            index = ord(answer) - ord("A")
            if not 0 <= index < len(options):
                raise ValueError(f"{csv_path}: answer {answer!r} out of range")
            questions.append(
                {
                    "id": f"{csv_path.stem}-{start_index + len(questions):05d}",
                    "category": category,
                    "question": question,
                    "options": options,
                    "answer_index": index,
                }
            )
    return questions


def main(argv: list[str]) -> int:
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 1
    out_path = Path(argv[1])
    total = 0
    with open(out_path, "w", encoding="utf-8") as out:
        for name in argv[2:]:
            for question in convert(Path(name), total):
                out.write(json.dumps(question, ensure_ascii=False) + "\n")
                total += 1
    print(f"wrote {total} questions to {out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
