from pathlib import Path

import pytest

from codeloop.corpus import CorpusEntry
from codeloop.errors import InvalidInputError
from codeloop.prompting import (
    FAILURE_MESSAGE_CAP,
    build_generation_prompt,
    build_repair_prompt,
    template_digests,
    truncate_tail,
)
from codeloop.retriever import RetrievalHit
from codeloop.sandbox import CandidateProgram, TestReport, Verdict

GOLDEN = Path(__file__).parent / "fixtures" / "prompts"

DEMO_ENTRIES = [
    CorpusEntry(
        "d1",
        "Write a python function to count true booleans in the given list",
        "def count_true(lst):\n    return sum(1 for x in lst if x is True)\n",
        ("assert count_true([True, False, True]) == 2", "assert count_true([]) == 0"),
    ),
    CorpusEntry(
        "d2",
        "Write a python function to find the maximum of two numbers",
        "def max_two(a, b):\n    return a if a > b else b\n",
        ("assert max_two(1, 2) == 2",),
    ),
    CorpusEntry(
        "d3",
        "Write a python function to reverse a string",
        "def reverse_string(s):\n    return s[::-1]\n",
        ("assert reverse_string('abc') == 'cba'", "assert reverse_string('') == ''"),
    ),
]
QUERY_REQ = "Write a python function to sum the digits of a non-negative integer"
QUERY_TESTS = ("assert digit_sum(0) == 0", "assert digit_sum(123) == 6")
CANDIDATE = CandidateProgram(source="def digit_sum(n):\n    return 0\n", task_id="q")

REPORTS = {
    "compile-error": TestReport(
        Verdict.COMPILE_ERROR,
        None,
        '  File "candidate.py", line 1\n    def digit_sum(n:\n                   ^\nSyntaxError: invalid syntax',
        0.01,
    ),
    "runtime-error": TestReport(
        Verdict.RUNTIME_ERROR,
        0,
        'Traceback (most recent call last):\n  File "main.py", line 6, in <module>\n    assert digit_sum(0) == 0\nNameError: name \'digit_sum\' is not defined',
        0.01,
    ),
    "assertion-failure": TestReport(
        Verdict.ASSERTION_FAILURE,
        1,
        'Traceback (most recent call last):\n  File "main.py", line 8, in <module>\n    assert digit_sum(123) == 6\nAssertionError',
        0.01,
    ),
    "timeout": TestReport(Verdict.TIMEOUT, None, "wall-clock limit of 10.0s exceeded", 10.0),
}


def hits(n):
    return [RetrievalHit(entry=e, score=1.0) for e in DEMO_ENTRIES[:n]]


@pytest.mark.parametrize("n", [0, 1, 3])
def test_generation_prompt_matches_golden_file(n):
    rendered = build_generation_prompt(hits(n), QUERY_REQ, QUERY_TESTS).rendered
    golden = (GOLDEN / f"generation_{n}_demos.txt").read_text(encoding="utf-8")
    assert rendered == golden


@pytest.mark.parametrize("verdict", ["compile-error", "runtime-error", "assertion-failure", "timeout"])
def test_repair_prompt_matches_golden_file(verdict):
    rendered = build_repair_prompt(QUERY_REQ, QUERY_TESTS, CANDIDATE, REPORTS[verdict]).rendered
    golden = (GOLDEN / f"repair_{verdict}.txt").read_text(encoding="utf-8")
    assert rendered == golden


def test_zero_hits_prompt_has_single_instruction_line_and_no_demo_code():
    prompt = build_generation_prompt([], QUERY_REQ, QUERY_TESTS)
    lines = prompt.rendered.splitlines()
    assert lines.count("# Write a python function") == 1
    assert all(line.startswith("# ") for line in lines)  # no code at all


def test_demo_block_precedes_query_and_query_code_absent():
    prompt = build_generation_prompt(hits(1), QUERY_REQ, QUERY_TESTS).rendered
    assert prompt.index(DEMO_ENTRIES[0].solution_code.strip()) < prompt.index(QUERY_REQ)
    assert prompt.rstrip("\n").endswith("# Write a python function")


def test_demo_code_appears_verbatim():
    code = "def weird(x):\n        return (x,\n                x)\n"
    entry = CorpusEntry("w", "odd indentation demo", code, ("assert weird(1) == (1, 1)",))
    prompt = build_generation_prompt([RetrievalHit(entry, 1.0)], QUERY_REQ, QUERY_TESTS)
    assert code in prompt.rendered


def test_generation_prompt_has_k_plus_one_requirement_sections():
    for n in (0, 1, 3):
        prompt = build_generation_prompt(hits(n), QUERY_REQ, QUERY_TESTS).rendered
        req_lines = [
            line
            for line in prompt.splitlines()
            if line.startswith("# Write a python function to")
        ]
        assert len(req_lines) == n + 1


def test_generation_prompt_deterministic():
    a = build_generation_prompt(hits(3), QUERY_REQ, QUERY_TESTS).rendered
    b = build_generation_prompt(hits(3), QUERY_REQ, QUERY_TESTS).rendered
    assert a == b


def test_repair_prompt_deterministic():
    report = REPORTS["assertion-failure"]
    a = build_repair_prompt(QUERY_REQ, QUERY_TESTS, CANDIDATE, report).rendered
    b = build_repair_prompt(QUERY_REQ, QUERY_TESTS, CANDIDATE, report).rendered
    assert a == b


def test_repair_prompt_contains_failing_assertion_text():
    prompt = build_repair_prompt(
        QUERY_REQ, QUERY_TESTS, CANDIDATE, REPORTS["assertion-failure"]
    )
    assert "assert digit_sum(123) == 6" in prompt.rendered
    assert "assertion-failure" in prompt.rendered


def test_repair_prompt_rejects_passing_report():
    passing = TestReport(Verdict.PASS, None, "", 0.01)
    with pytest.raises(InvalidInputError):
        build_repair_prompt(QUERY_REQ, QUERY_TESTS, CANDIDATE, passing)


def test_long_traceback_truncated_to_tail():
    filler = "\n".join(f"  File \"deep.py\", line {i}, in frame{i}" for i in range(400))
    message = filler + "\nAssertionError: the informative final line"
    assert len(message) > 10_000
    report = TestReport(Verdict.ASSERTION_FAILURE, 0, message, 0.01)
    prompt = build_repair_prompt(QUERY_REQ, QUERY_TESTS, CANDIDATE, report)
    assert len(prompt.failure_message) <= FAILURE_MESSAGE_CAP
    assert "AssertionError: the informative final line" in prompt.rendered
    assert prompt.failure_message == message[-FAILURE_MESSAGE_CAP:]


def test_truncate_tail_keeps_short_messages():
    assert truncate_tail("short") == "short"


def test_custom_comment_marker():
    prompt = build_generation_prompt([], QUERY_REQ, QUERY_TESTS, marker="// ")
    assert "// Write a python function" in prompt.rendered
    assert "# " not in prompt.rendered


def test_template_digests_stable_and_complete():
    digests = template_digests()
    assert set(digests) == {"generation_demo.txt", "generation_query.txt", "repair.txt"}
    assert all(len(v) == 64 for v in digests.values())
    assert template_digests() == digests
