#!/usr/bin/env python3
"""Regenerate the 20-task synthetic corpus and its scripted backend.

The script is constructed so that, by design, the four ablation
scenarios solve a fixed number of tasks (k=1, token strategy, one
repair round):

    generate-only           8   (tasks 1-8 solve outright)
    search-generate        12   (+ tasks 9-12, solved only when the
                                  retrieved twin demonstration is in
                                  the prompt)
    generate-repair        14   (+ tasks 12-17, fixed on repair round 1)
    search-generate-repair 17   (8 + 4 search-solved + 5 repair-only)

Tasks come in twin pairs with near-identical requirements so each task
retrieves its twin under leave-one-out top-1 retrieval. Rule kinds:

  * query-position substring (last test line adjacent to the generation
    instruction) -> fires only when the task is the query, on any
    generation prompt;
  * exact prompt hash -> fires only on the task's search-augmented
    generation prompt (twin demonstration included);
  * broken-marker substring -> fires only on the task's repair prompt,
    because the marker lives in the broken candidate code.

Run from the repository root:  python3 scripts/make_synthetic_fixture.py
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from codeloop.corpus import Corpus, CorpusEntry
from codeloop.prompting import build_generation_prompt
from codeloop.retriever import Retriever, RetrievalHit, SimilarityStrategy

ROOT = Path(__file__).resolve().parent.parent
CORPUS_PATH = ROOT / "corpora" / "synthetic_20.jsonl"
SCRIPT_PATH = ROOT / "corpora" / "synthetic_20_script.json"

TAGS = [
    "taskalfa", "taskbravo", "taskcharlie", "taskdelta", "taskecho",
    "taskfoxtrot", "taskgolf", "taskhotel", "taskindia", "taskjuliett",
    "taskkilo", "tasklima", "taskmike", "tasknovember", "taskoscar",
    "taskpapa", "taskquebec", "taskromeo", "tasksierra", "tasktango",
]

# one phrase per twin pair
PHRASES = [
    "add two integer values together and return the total amount",
    "multiply two integer values and return the resulting product",
    "reverse the characters of a text value and return the outcome",
    "count how many vowels appear inside a text value",
    "return the largest element found in a sequence of numbers",
    "return the smallest element found in a sequence of numbers",
    "compute the factorial of a small non negative integer",
    "check whether a given integer value is an even number",
    "sum all the numbers contained in a sequence of values",
    "concatenate two text values together into a single string",
]

BODIES = {
    0: ("a, b", "return a + b",
        [("(1, 2)", "3"), ("(0, 0)", "0"), ("(-1, 5)", "4")]),
    1: ("a, b", "return a * b",
        [("(2, 3)", "6"), ("(0, 7)", "0"), ("(-2, 4)", "-8")]),
    2: ("s", "return s[::-1]",
        [("('abc')", "'cba'"), ("('')", "''"), ("('ab')", "'ba'")]),
    3: ("s", 'return sum(1 for ch in s if ch in "aeiou")',
        [("('abc')", "1"), ("('aeiou')", "5"), ("('xyz')", "0")]),
    4: ("xs", "return max(xs)",
        [("([1, 3, 2])", "3"), ("([5])", "5"), ("([-1, -7])", "-1")]),
    5: ("xs", "return min(xs)",
        [("([1, 3, 2])", "1"), ("([5])", "5"), ("([-1, -7])", "-7")]),
    6: ("n", "result = 1\n    for i in range(2, n + 1):\n        result *= i\n    return result",
        [("(0)", "1"), ("(3)", "6"), ("(5)", "120")]),
    7: ("n", "return n % 2 == 0",
        [("(2)", "True"), ("(3)", "False"), ("(0)", "True")]),
    8: ("xs", "return sum(xs)",
        [("([1, 2, 3])", "6"), ("([])", "0"), ("([-1, 1])", "0")]),
    9: ("a, b", "return a + b",
        [("('foo', 'bar')", "'foobar'"), ("('', 'x')", "'x'"), ("('a', '')", "'a'")]),
}

SOLVE_AT_GENERATION = set(range(1, 9))        # tasks 1-8
SOLVE_WITH_SEARCH = {9, 10, 11, 12}           # only with the twin demo
SOLVE_WITH_REPAIR = {12, 13, 14, 15, 16, 17}  # fixed on round 1

EXPECTED_COUNTS = {
    "generate-only": 8,
    "search-generate": 12,
    "generate-repair": 14,
    "search-generate-repair": 17,
}


def build_tasks():
    tasks = []
    for i in range(1, 21):
        pair = (i - 1) // 2
        tag = TAGS[i - 1]
        fname = f"{tag}_fn"
        params, body, cases = BODIES[pair]
        requirement = f"Write a python function {fname} tagged {tag} to {PHRASES[pair]}"
        solution = f"def {fname}({params}):\n    {body}\n"
        tests = [f"assert {fname}{args} == {expect}" for args, expect in cases]
        broken = f"def {fname}({params}):\n    # broken-{tag}\n    return None\n"
        tasks.append(
            {
                "index": i,
                "task_id": f"syn-{i:02d}",
                "tag": tag,
                "requirement": requirement,
                "solution": solution,
                "tests": tests,
                "broken": broken,
            }
        )
    return tasks


def main():
    tasks = build_tasks()
    entries = tuple(
        CorpusEntry(
            task_id=t["task_id"],
            requirement=t["requirement"],
            solution_code=t["solution"],
            test_list=tuple(t["tests"]),
        )
        for t in tasks
    )
    corpus = Corpus(entries=entries, source_path=str(CORPUS_PATH))

    # sanity: every task retrieves its twin under leave-one-out top-1
    retriever = Retriever(strategy=SimilarityStrategy(kind="token-jaccard"))
    for t in tasks:
        twin_index = t["index"] + 1 if t["index"] % 2 else t["index"] - 1
        view = Corpus(
            entries=tuple(e for e in entries if e.task_id != t["task_id"]),
            source_path="loo",
        )
        hits = retriever.search(t["requirement"], view, 1)
        assert hits[0].entry.task_id == f"syn-{twin_index:02d}", (
            t["task_id"], hits[0].entry.task_id
        )

    rules = []
    for t in tasks:
        i = t["index"]
        query_marker = f"# {t['tests'][-1]}\n# Write a python function"
        if i in SOLVE_AT_GENERATION:
            rules.append(
                {"match": "substring", "pattern": query_marker, "completion": t["solution"]}
            )
            continue
        if i in SOLVE_WITH_SEARCH:
            twin_index = i + 1 if i % 2 else i - 1
            twin = entries[twin_index - 1]
            prompt = build_generation_prompt(
                [RetrievalHit(entry=twin, score=1.0)], t["requirement"], t["tests"]
            ).rendered
            rules.append(
                {
                    "match": "hash",
                    "pattern": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
                    "completion": t["solution"],
                }
            )
        repair_completion = t["solution"] if i in SOLVE_WITH_REPAIR else t["broken"]
        rules.append(
            {
                "match": "substring",
                "pattern": f"broken-{t['tag']}",
                "completion": repair_completion,
            }
        )
        rules.append(
            {"match": "substring", "pattern": query_marker, "completion": t["broken"]}
        )

    CORPUS_PATH.parent.mkdir(parents=True, exist_ok=True)
    with open(CORPUS_PATH, "w", encoding="utf-8") as fh:
        for t in tasks:
            fh.write(
                json.dumps(
                    {
                        "task_id": t["task_id"],
                        "text": t["requirement"],
                        "code": t["solution"],
                        "test_list": t["tests"],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    SCRIPT_PATH.write_text(
        json.dumps(
            {
                "backend_id": "scripted-synthetic-20",
                "expected_solved": EXPECTED_COUNTS,
                "rules": rules,
                "default": None,
            },
            indent=2,
            ensure_ascii=False,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {CORPUS_PATH} ({len(tasks)} tasks) and {SCRIPT_PATH} ({len(rules)} rules)")


if __name__ == "__main__":
    main()
