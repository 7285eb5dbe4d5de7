"""Seed corpus handling: load documents, sample line-window snippets, dedup.

Input corpus is line-delimited JSON, one document per line with
``source_id``, ``language``, ``text`` fields. Snippets are contiguous
windows of 5-20 lines sampled with a seeded generator so runs are
reproducible.
"""

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Tuple

from .errors import DocumentTooShort, EmptyCorpus

MIN_SNIPPET_LINES = 5
MAX_SNIPPET_LINES = 20

LANGUAGE_TAGS = ("python", "javascript", "java", "c_cpp", "sql", "other")

_LANGUAGE_ALIASES = {
    "python": "python", "py": "python",
    "javascript": "javascript", "js": "javascript", "node": "javascript",
    "java": "java",
    "c": "c_cpp", "c++": "c_cpp", "cpp": "c_cpp", "cxx": "c_cpp", "cc": "c_cpp",
    "c/c++": "c_cpp",
    "sql": "sql", "mysql": "sql", "postgresql": "sql", "sqlite": "sql",
}


def normalize_language(tag: str) -> str:
    """Map a raw language label onto the fixed tag set; unknown -> other."""
    return _LANGUAGE_ALIASES.get(tag.strip().lower(), "other")


@dataclass(frozen=True)
class CorpusDocument:
    source_id: str
    language: str
    text: str

    def lines(self) -> List[str]:
        return self.text.splitlines()


@dataclass(frozen=True)
class CodeSnippet:
    id: str
    language: str
    text: str
    source_id: str
    line_range: Tuple[int, int]  # inclusive, 1-based in source document

    @property
    def line_count(self) -> int:
        return len(self.text.splitlines())

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "language": self.language,
            "text": self.text,
            "source_id": self.source_id,
            "line_range": list(self.line_range),
        }

    @staticmethod
    def from_dict(d: dict) -> "CodeSnippet":
        return CodeSnippet(
            id=d["id"],
            language=d["language"],
            text=d["text"],
            source_id=d["source_id"],
            line_range=tuple(d["line_range"]),
        )


@dataclass
class CorpusLoadResult:
    documents: List[CorpusDocument]
    rejects: List[dict] = field(default_factory=list)


def load_corpus(path: str | Path) -> CorpusLoadResult:
    """Read a line-delimited corpus file.

    Unparseable or incomplete lines are reported in ``rejects`` but do not
    abort the load. Raises EmptyCorpus when no valid record remains.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    documents: List[CorpusDocument] = []
    rejects: List[dict] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
                doc = CorpusDocument(
                    source_id=str(obj["source_id"]),
                    language=normalize_language(str(obj["language"])),
                    text=str(obj["text"]),
                )
                if not doc.text:
                    raise ValueError("empty text")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                rejects.append({"line": lineno, "reason": str(exc), "raw": raw[:200]})
                continue
            documents.append(doc)
    if not documents:
        raise EmptyCorpus(str(path))
    return CorpusLoadResult(documents=documents, rejects=rejects)


def snippet_id(source_id: str, start: int, end: int) -> str:
    digest = hashlib.sha1(f"{source_id}:{start}:{end}".encode("utf-8")).hexdigest()
    return digest[:16]


def sample_snippets(doc: CorpusDocument, count: int, rng_seed: int) -> List[CodeSnippet]:
    """Sample ``count`` contiguous line windows from one document.

    Window length is uniform in [5, min(20, doc lines)]; start positions are
    uniform over the valid range. Deterministic for a fixed seed.
    """
    if count < 1:
        raise ValueError("count must be positive")
    lines = doc.lines()
    if len(lines) < MIN_SNIPPET_LINES:
        raise DocumentTooShort(f"{doc.source_id}: {len(lines)} lines")
    rng = random.Random(rng_seed)
    max_len = min(MAX_SNIPPET_LINES, len(lines))
    snippets: List[CodeSnippet] = []
    for _ in range(count):
        length = rng.randint(MIN_SNIPPET_LINES, max_len)
        start = rng.randint(1, len(lines) - length + 1)
        end = start + length - 1
        text = "\n".join(lines[start - 1:end])
        snippets.append(
            CodeSnippet(
                id=snippet_id(doc.source_id, start, end),
                language=doc.language,
                text=text,
                source_id=doc.source_id,
                line_range=(start, end),
            )
        )
    return snippets


def normalize_snippet_text(text: str) -> str:
    """Per-line trim used for exact-duplicate detection."""
    return "\n".join(line.strip() for line in text.splitlines())


def dedup_snippets(snippets: Iterable[CodeSnippet]) -> List[CodeSnippet]:
    """Keep the first occurrence of each normalized text, preserving order."""
    seen = set()
    kept: List[CodeSnippet] = []
    for snip in snippets:
        key = normalize_snippet_text(snip.text)
        if key in seen:
            continue
        seen.add(key)
        kept.append(snip)
    return kept
