"""Retrieval database of prior (requirement, code, tests) triples.

The native on-disk format is newline-delimited JSON, one record per
line, with keys ``task_id``, ``text``, ``code`` and ``test_list`` (the
de-facto MBPP layout). A whole file is rejected on the first malformed
record: silently dropping records would silently change retrieval
results downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import (
    CorpusIOError,
    CorpusParseError,
    DuplicateTaskIdError,
    UnknownTaskIdError,
)

SUPPORTED_FORMATS = ("mbpp-jsonl",)


@dataclass(frozen=True)
class CorpusEntry:
    """One prior solution: requirement text, code, and its test assertions."""

    task_id: str
    requirement: str
    solution_code: str
    test_list: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    """Immutable, ordered collection of entries; order equals file order."""

    entries: tuple[CorpusEntry, ...]
    source_path: str

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[CorpusEntry]:
        return iter(self.entries)

    def get(self, task_id: str) -> CorpusEntry:
        for entry in self.entries:
            if entry.task_id == task_id:
                return entry
        raise UnknownTaskIdError(task_id)

    def task_ids(self) -> tuple[str, ...]:
        return tuple(e.task_id for e in self.entries)


def _parse_record(raw: str, line_no: int) -> CorpusEntry:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorpusParseError(line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise CorpusParseError(line_no, "record is not an object")

    for key in ("task_id", "text", "code", "test_list"):
        if key not in obj:
            raise CorpusParseError(line_no, f"missing key {key!r}")

    task_id = obj["task_id"]
    if isinstance(task_id, bool) or not isinstance(task_id, (str, int)):
        raise CorpusParseError(line_no, "task_id must be a string or integer")
    task_id = str(task_id)
    if not task_id:
        raise CorpusParseError(line_no, "task_id is empty")

    text = obj["text"]
    if not isinstance(text, str) or not text.strip():
        raise CorpusParseError(line_no, "text must be a non-empty string")

    code = obj["code"]
    if not isinstance(code, str):
        raise CorpusParseError(line_no, "code must be a string")

    tests = obj["test_list"]
    if not isinstance(tests, list) or not all(isinstance(t, str) for t in tests):
        raise CorpusParseError(line_no, "test_list must be an array of strings")

    return CorpusEntry(
        task_id=task_id,
        requirement=text,
        solution_code=code,
        test_list=tuple(tests),
    )


def load_corpus(path: str | Path, format: str = "mbpp-jsonl") -> Corpus:
    """Load and validate a corpus file, rejecting the whole file on any
    malformed record (with its line number)."""
    if format not in SUPPORTED_FORMATS:
        raise ValueError(f"unsupported corpus format {format!r}")
    path = Path(path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusIOError(f"cannot read corpus file {path}: {exc}") from exc

    entries: list[CorpusEntry] = []
    seen: dict[str, int] = {}
    for i, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            continue
        entry = _parse_record(raw, i)
        if entry.task_id in seen:
            raise DuplicateTaskIdError(entry.task_id, i)
        seen[entry.task_id] = i
        entries.append(entry)
    return Corpus(entries=tuple(entries), source_path=str(path))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out in its native format (round-trip safe)."""
    lines = []
    for e in corpus.entries:
        lines.append(
            json.dumps(
                {
                    "task_id": e.task_id,
                    "text": e.requirement,
                    "code": e.solution_code,
                    "test_list": list(e.test_list),
                },
                ensure_ascii=False,
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def leave_one_out_view(corpus: Corpus, excluded_task_id: str) -> Corpus:
    """Corpus minus one entry, order preserved. Used in benchmark mode so
    a query can never retrieve its own answer."""
    if excluded_task_id not in corpus.task_ids():
        raise UnknownTaskIdError(excluded_task_id)
    return Corpus(
        entries=tuple(e for e in corpus.entries if e.task_id != excluded_task_id),
        source_path=f"{corpus.source_path}#minus-{excluded_task_id}",
    )
