import json

import pytest

from codeloop.corpus import Corpus, CorpusEntry, leave_one_out_view, load_corpus, save_corpus
from codeloop.errors import (
    CorpusIOError,
    CorpusParseError,
    DuplicateTaskIdError,
    UnknownTaskIdError,
)


def write_jsonl(path, records):
    path.write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )


def record(task_id, text="do a thing", code="def f():\n    return 1\n", tests=None):
    return {
        "task_id": task_id,
        "text": text,
        "code": code,
        "test_list": tests if tests is not None else ["assert f() == 1"],
    }


def test_load_well_formed_preserves_order(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [record("a"), record("b"), record("c")])
    corpus = load_corpus(path)
    assert len(corpus) == 3
    assert corpus.task_ids() == ("a", "b", "c")


def test_integer_task_ids_normalized_to_strings(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [record(11), record(12)])
    corpus = load_corpus(path)
    assert corpus.task_ids() == ("11", "12")


def test_duplicate_task_id_names_id_and_line(tmp_path):
    path = tmp_path / "c.jsonl"
    records = [record(str(i)) for i in range(1, 7)] + [record("11")]
    records[0]["task_id"] = "11"
    write_jsonl(path, records)
    with pytest.raises(DuplicateTaskIdError) as exc:
        load_corpus(path)
    assert exc.value.task_id == "11"
    assert exc.value.line == 7


def test_whole_file_rejected_on_malformed_record(tmp_path):
    path = tmp_path / "c.jsonl"
    lines = [json.dumps(record("a")), "{not json", json.dumps(record("b"))]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(CorpusParseError) as exc:
        load_corpus(path)
    assert exc.value.line == 2


@pytest.mark.parametrize(
    "mutate, reason_part",
    [
        (lambda r: r.pop("text"), "missing key 'text'"),
        (lambda r: r.update(text="   "), "non-empty"),
        (lambda r: r.update(task_id=""), "task_id"),
        (lambda r: r.update(test_list="nope"), "test_list"),
        (lambda r: r.update(code=7), "code"),
    ],
)
def test_invalid_fields_rejected(tmp_path, mutate, reason_part):
    rec = record("a")
    mutate(rec)
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [rec])
    with pytest.raises(CorpusParseError) as exc:
        load_corpus(path)
    assert reason_part in str(exc.value)


def test_unreadable_path_raises_io_error(tmp_path):
    with pytest.raises(CorpusIOError):
        load_corpus(tmp_path / "missing.jsonl")


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ValueError):
        load_corpus(tmp_path / "x.jsonl", format="csv")


def test_unknown_keys_ignored(tmp_path):
    rec = record("a")
    rec["challenge_test_list"] = []
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [rec])
    assert len(load_corpus(path)) == 1


def test_empty_test_list_accepted_for_retrieval(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [record("a", tests=[])])
    corpus = load_corpus(path)
    assert corpus.entries[0].test_list == ()


def test_round_trip_is_content_preserving(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(
        path,
        [
            record("a", text="find the nth ugly number"),
            record("b", code="def g(x):\n    return x * 2\n", tests=["assert g(2) == 4"]),
        ],
    )
    corpus = load_corpus(path)
    out = tmp_path / "copy.jsonl"
    save_corpus(corpus, out)
    again = load_corpus(out)
    assert again.entries == corpus.entries


def test_leave_one_out_excludes_only_target():
    entries = tuple(
        CorpusEntry(t, f"req {t}", "pass", ()) for t in ("A", "B", "C")
    )
    corpus = Corpus(entries=entries, source_path="mem")
    view = leave_one_out_view(corpus, "A")
    assert view.task_ids() == ("B", "C")


def test_leave_one_out_singleton_gives_empty_view():
    corpus = Corpus(
        entries=(CorpusEntry("only", "req", "pass", ()),), source_path="mem"
    )
    assert len(leave_one_out_view(corpus, "only")) == 0


def test_leave_one_out_unknown_id():
    corpus = Corpus(entries=(CorpusEntry("a", "req", "", ()),), source_path="mem")
    with pytest.raises(UnknownTaskIdError):
        leave_one_out_view(corpus, "zzz")


def test_leave_one_out_property_every_id():
    entries = tuple(CorpusEntry(str(i), f"req {i}", "", ()) for i in range(25))
    corpus = Corpus(entries=entries, source_path="mem")
    for task_id in corpus.task_ids():
        view = leave_one_out_view(corpus, task_id)
        assert len(view) == len(corpus) - 1
        assert task_id not in view.task_ids()
        # order preserved
        assert list(view.task_ids()) == [t for t in corpus.task_ids() if t != task_id]


def test_get_unknown_id():
    corpus = Corpus(entries=(), source_path="mem")
    with pytest.raises(UnknownTaskIdError):
        corpus.get("nope")
