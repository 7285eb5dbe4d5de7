"""Parsers for the structured sections of model output.

All parsers are tolerant of the noise real model output carries: heading
matching is case-insensitive, markdown emphasis around headings is
ignored, and when a model repeats its final block the last occurrence
wins. Every failure raises ParseFailure (or OutOfRange) -- parsers never
raise anything else, whatever the input.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from .templates import ProblemType
from ..errors import ParseFailure


@dataclass(frozen=True)
class ReverseQuestion:
    language: str
    description: str
    problem_type: Optional[ProblemType] = None
    lineage: Optional[str] = None  # source snippet id


_LANG_MARKER = re.compile(
    r"\**\[?\**Programming Language\**\]?\**\s*:", re.IGNORECASE
)
_DESC_MARKER = re.compile(
    r"\**\[?\**Problem Description\**\]?\**\s*:", re.IGNORECASE
)


def parse_reverse_output(
    text: str,
    problem_type: Optional[ProblemType] = None,
    lineage: Optional[str] = None,
) -> ReverseQuestion:
    """Extract the final [Programming Language] / [Problem Description] pair."""
    lang_matches = list(_LANG_MARKER.finditer(text))
    if not lang_matches:
        raise ParseFailure("no Programming Language marker", text[-200:])
    lang_start = lang_matches[-1].end()
    desc_match = _DESC_MARKER.search(text, lang_start)
    if desc_match is None:
        raise ParseFailure("no Problem Description marker after language", text[lang_start:][:200])
    language = text[lang_start:desc_match.start()].strip().strip("*[]").strip()
    description = text[desc_match.end():].strip()
    if not language:
        raise ParseFailure("empty programming language", text[lang_start:][:80])
    if not description:
        raise ParseFailure("empty problem description", text[-200:])
    return ReverseQuestion(
        language=language,
        description=description,
        problem_type=problem_type,
        lineage=lineage,
    )


def _last_heading_body(text: str, heading: str) -> str:
    """Body after the final occurrence of a numbered/emphasised heading."""
    pattern = re.compile(
        r"^\s*(?:\d+\.\s*)?[#*_]*" + re.escape(heading) + r"[#*_]*\s*:?",
        re.IGNORECASE | re.MULTILINE,
    )
    matches = list(pattern.finditer(text))
    if not matches:
        raise ParseFailure(f"no '{heading}' heading", text[-200:])
    return text[matches[-1].end():]


def parse_rewrite_output(text: str) -> str:
    """Everything after the final 'Rewritten Question:' heading, trimmed."""
    body = _last_heading_body(text, "Rewritten Question").strip()
    if not body:
        raise ParseFailure("empty rewritten question", text[-200:])
    return body


_SECTION_STOP = re.compile(
    r"^\s*-?\s*\**(Code Section|Completeness Verification)\**\s*:",
    re.IGNORECASE | re.MULTILINE,
)


def parse_complicate_output(text: str) -> str:
    """Join the Prompt Section and Code Section bodies of the results block.

    A literal "None" code section is omitted. The prompt section keeps the
    document order the model emitted.
    """
    results = _last_heading_body(text, "Complexity Results")
    prompt_match = re.search(
        r"^\s*-?\s*\**Prompt Section\**\s*:", results, re.IGNORECASE | re.MULTILINE
    )
    if prompt_match is None:
        raise ParseFailure("no Prompt Section in Complexity Results", results[:200])
    after_prompt = results[prompt_match.end():]
    stop = _SECTION_STOP.search(after_prompt)
    prompt_body = (after_prompt[: stop.start()] if stop else after_prompt).strip()
    if not prompt_body:
        raise ParseFailure("empty Prompt Section", results[:200])

    code_body = ""
    code_match = re.search(
        r"^\s*-?\s*\**Code Section\**\s*:", results, re.IGNORECASE | re.MULTILINE
    )
    if code_match is not None:
        after_code = results[code_match.end():]
        stop = re.search(
            r"^\s*-?\s*\**Completeness Verification\**\s*:",
            after_code,
            re.IGNORECASE | re.MULTILINE,
        )
        code_body = (after_code[: stop.start()] if stop else after_code).strip()
        if code_body.strip("`* ").lower() == "none":
            code_body = ""
    if code_body:
        return prompt_body + "\n\n" + code_body
    return prompt_body


class KeywordDimension(str, Enum):
    TASK = "Task"
    INSTRUCTION = "Instruction"
    KNOWLEDGE = "Knowledge"


_DIMENSION_HEADERS = {
    KeywordDimension.TASK: "Task",
    KeywordDimension.INSTRUCTION: "Instructions",
    KeywordDimension.KNOWLEDGE: "Knowledge Points",
}

_BRACKETED = re.compile(r"\[([^\[\]]*)\]")


def parse_keyword_output(text: str, dimension: KeywordDimension) -> List[str]:
    """Bracketed keywords after the dimension header; empty brackets -> []."""
    header = _DIMENSION_HEADERS[dimension]
    pattern = re.compile(r"\[\s*" + re.escape(header) + r"\s*\]\s*:", re.IGNORECASE)
    matches = list(pattern.finditer(text))
    if not matches:
        raise ParseFailure(f"no [{header}]: header", text[-200:])
    # Keywords run to end of the header's line (they are emitted inline).
    tail = text[matches[-1].end():]
    line_end = tail.find("\n")
    payload = tail if line_end < 0 else tail[:line_end]
    keywords = [m.group(1).strip() for m in _BRACKETED.finditer(payload)]
    return [k for k in keywords if k]


_NUMBERED_STEP = re.compile(r"^\s*\**(\d+)[.)]\s*", re.MULTILINE)
_STEP_LABEL = re.compile(r"^\**Final question output\**\s*:?\s*", re.IGNORECASE)


def parse_backfeed_output(text: str) -> str:
    """Body of the final numbered step of the question-generation workflow."""
    matches = list(_NUMBERED_STEP.finditer(text))
    if not matches:
        raise ParseFailure("no numbered steps", text[-200:])
    body = text[matches[-1].end():]
    body = _STEP_LABEL.sub("", body.strip(), count=1).strip()
    if not body:
        raise ParseFailure("empty final step", text[-200:])
    return body
