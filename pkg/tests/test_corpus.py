import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instructpipe.corpus import (
    MAX_SNIPPET_LINES,
    MIN_SNIPPET_LINES,
    CodeSnippet,
    CorpusDocument,
    dedup_snippets,
    load_corpus,
    normalize_language,
    sample_snippets,
)
from instructpipe.errors import DocumentTooShort, EmptyCorpus


def _write_corpus(path, docs):
    with path.open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc) + "\n")


def _doc(lines=30, source_id="doc-1", language="python"):
    text = "\n".join(f"line_{i} = {i}" for i in range(lines))
    return CorpusDocument(source_id=source_id, language=language, text=text)


class TestLoadCorpus:
    def test_valid_lines_loaded(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        _write_corpus(path, [
            {"source_id": "a", "language": "Python", "text": "x = 1"},
            {"source_id": "b", "language": "js", "text": "var y;"},
        ])
        result = load_corpus(path)
        assert [d.source_id for d in result.documents] == ["a", "b"]
        assert result.documents[0].language == "python"
        assert result.documents[1].language == "javascript"
        assert result.rejects == []

    def test_bad_lines_rejected_not_fatal(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(
            '{"source_id": "a", "language": "sql", "text": "SELECT 1"}\n'
            "not json at all\n"
            '{"language": "sql", "text": "missing id"}\n',
            encoding="utf-8",
        )
        result = load_corpus(path)
        assert len(result.documents) == 1
        assert len(result.rejects) == 2
        assert all("reason" in r for r in result.rejects)

    def test_empty_corpus_raises(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("\n", encoding="utf-8")
        with pytest.raises(EmptyCorpus):
            load_corpus(path)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_corpus(tmp_path / "nope.jsonl")


class TestNormalizeLanguage:
    @pytest.mark.parametrize("raw,expected", [
        ("Python", "python"),
        ("py", "python"),
        ("JS", "javascript"),
        ("C++", "c_cpp"),
        ("cpp", "c_cpp"),
        ("Java", "java"),
        ("SQL", "sql"),
        ("brainfuck", "other"),
    ])
    def test_alias(self, raw, expected):
        assert normalize_language(raw) == expected


class TestSampleSnippets:
    def test_deterministic_for_seed(self):
        doc = _doc()
        assert sample_snippets(doc, 3, rng_seed=7) == sample_snippets(doc, 3, rng_seed=7)

    def test_different_seed_differs(self):
        doc = _doc(lines=200)
        a = sample_snippets(doc, 5, rng_seed=1)
        b = sample_snippets(doc, 5, rng_seed=2)
        assert [s.line_range for s in a] != [s.line_range for s in b]

    def test_too_short_document(self):
        with pytest.raises(DocumentTooShort):
            sample_snippets(_doc(lines=MIN_SNIPPET_LINES - 1), 1, rng_seed=0)

    def test_snippet_text_matches_source_window(self):
        doc = _doc(lines=40)
        lines = doc.lines()
        for snippet in sample_snippets(doc, 10, rng_seed=3):
            start, end = snippet.line_range
            assert snippet.text == "\n".join(lines[start - 1:end])

    @given(lines=st.integers(MIN_SNIPPET_LINES, 120), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_window_bounds_property(self, lines, seed):
        doc = _doc(lines=lines)
        for snippet in sample_snippets(doc, 4, rng_seed=seed):
            assert MIN_SNIPPET_LINES <= snippet.line_count <= MAX_SNIPPET_LINES
            start, end = snippet.line_range
            assert 1 <= start <= end <= lines


class TestDedupSnippets:
    def _snippet(self, text, sid="s"):
        return CodeSnippet(id=sid, language="python", text=text,
                           source_id="d", line_range=(1, len(text.splitlines())))

    def test_first_occurrence_kept(self):
        a = self._snippet("x = 1\ny = 2\nz = 3\nw = 4\nv = 5", sid="a")
        b = self._snippet("  x = 1\n y = 2\nz = 3\nw = 4\nv = 5  ", sid="b")
        kept = dedup_snippets([a, b])
        assert [s.id for s in kept] == ["a"]

    def test_distinct_kept_in_order(self):
        snippets = [self._snippet(f"a = {i}\nb\nc\nd\ne", sid=str(i)) for i in range(3)]
        assert dedup_snippets(snippets) == snippets


class TestSnippetSerialization:
    def test_roundtrip(self):
        snippet = CodeSnippet(id="abc", language="sql", text="SELECT 1",
                              source_id="doc", line_range=(3, 7))
        assert CodeSnippet.from_dict(snippet.to_dict()) == snippet
