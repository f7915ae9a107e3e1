"""Deterministic prompt rendering for generation and repair.

The exact template text is fixed by the files in ``templates/`` and
pinned with golden-file tests; any drift in the rendered prompts is a
deliberate, visible change. Rendering is a pure function of its inputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from .errors import InvalidInputError
from .retriever import RetrievalHit
from .sandbox import CandidateProgram, TestReport, Verdict

COMMENT_MARKER = "# "
FAILURE_MESSAGE_CAP = 2000


def _load_template(name: str) -> str:
    return resources.files("codeloop.templates").joinpath(name).read_text("utf-8")


_DEMO_TEMPLATE = _load_template("generation_demo.txt")
_QUERY_TEMPLATE = _load_template("generation_query.txt")
_REPAIR_TEMPLATE = _load_template("repair.txt")


def template_digests() -> dict[str, str]:
    """sha256 of each shipped template file, for run manifests."""
    out = {}
    for name in ("generation_demo.txt", "generation_query.txt", "repair.txt"):
        raw = resources.files("codeloop.templates").joinpath(name).read_bytes()
        out[name] = hashlib.sha256(raw).hexdigest()
    return out


def truncate_tail(message: str, cap: int = FAILURE_MESSAGE_CAP) -> str:
    """Keep the last ``cap`` characters: tracebacks end with the useful frame."""
    if len(message) <= cap:
        return message
    return message[-cap:]


def _comment(text: str, marker: str) -> str:
    if not text:
        return ""
    return "".join(marker + line + "\n" for line in text.splitlines())


def _comment_lines(lines: Sequence[str], marker: str) -> str:
    return "".join(_comment(line, marker) for line in lines)


def _normalize_code(code: str) -> str:
    return code.rstrip("\n") + "\n"


@dataclass(frozen=True)
class Demonstration:
    requirement: str
    test_list: tuple[str, ...]
    code: str


@dataclass(frozen=True)
class GenerationPrompt:
    demonstrations: tuple[Demonstration, ...]
    query_requirement: str
    query_tests: tuple[str, ...]
    rendered: str

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.rendered.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RepairPrompt:
    requirement: str
    test_list: tuple[str, ...]
    candidate_code: str
    failure_message: str
    rendered: str

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.rendered.encode("utf-8")).hexdigest()


def build_generation_prompt(
    hits: Sequence[RetrievalHit],
    requirement: str,
    tests: Sequence[str],
    marker: str = COMMENT_MARKER,
) -> GenerationPrompt:
    """Render retrieved demonstrations (in hit order) followed by the query.

    With no hits the demonstrations section is omitted entirely, which is
    exactly the generation-only prompt.
    """
    demos = tuple(
        Demonstration(
            requirement=h.entry.requirement,
            test_list=tuple(h.entry.test_list),
            code=h.entry.solution_code,
        )
        for h in hits
    )
    parts = []
    for demo in demos:
        parts.append(
            _DEMO_TEMPLATE.format(
                commented_requirement=_comment(demo.requirement, marker),
                commented_tests=_comment_lines(demo.test_list, marker),
                code=_normalize_code(demo.code),
            )
        )
        parts.append("\n")
    parts.append(
        _QUERY_TEMPLATE.format(
            commented_requirement=_comment(requirement, marker),
            commented_tests=_comment_lines(tests, marker),
            marker=marker,
        )
    )
    return GenerationPrompt(
        demonstrations=demos,
        query_requirement=requirement,
        query_tests=tuple(tests),
        rendered="".join(parts),
    )


def build_repair_prompt(
    requirement: str,
    tests: Sequence[str],
    candidate: CandidateProgram,
    report: TestReport,
    marker: str = COMMENT_MARKER,
) -> RepairPrompt:
    """Render the failing candidate plus its verdict and truncated diagnostics."""
    if report.verdict == Verdict.PASS:
        raise InvalidInputError("cannot build a repair prompt from a passing report")
    failure = truncate_tail(report.message)
    rendered = _REPAIR_TEMPLATE.format(
        commented_requirement=_comment(requirement, marker),
        commented_tests=_comment_lines(tests, marker),
        candidate_code=_normalize_code(candidate.source),
        verdict=report.verdict.value,
        commented_failure=_comment(failure, marker),
        marker=marker,
    )
    return RepairPrompt(
        requirement=requirement,
        test_list=tuple(tests),
        candidate_code=candidate.source,
        failure_message=failure,
        rendered=rendered,
    )
