"""Seven-criteria prompt filtering and 1-10 complexity assessment.

A prompt is judged three times; each judgement lists which of the seven
criteria it meets, the per-judgement score is the count of criteria met,
and the final score is the mean of the three counts. Prompts scoring
below the cutoff (default 6) are dropped.
"""

import json
import re
import statistics
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

from .errors import EmptyInput, OutOfRange, ParseFailure, RecordError, ScoringIncomplete
from .gateway import CompletionRequest, Gateway
from .prompts import QUALITY_FILTER, COMPLEXITY_ASSESS, render

CRITERIA_RANGE = range(1, 8)
ASSESSMENT_COUNT = 3
SCORE_CUTOFF = 6.0


@dataclass(frozen=True)
class CriteriaAssessment:
    met: frozenset
    raw_text: str

    def __post_init__(self):
        for value in self.met:
            if value not in CRITERIA_RANGE:
                raise OutOfRange(f"criterion {value} outside 1..7")

    @property
    def score(self) -> int:
        return len(self.met)


@dataclass(frozen=True)
class ScoreCard:
    assessments: Tuple[CriteriaAssessment, ...]
    final_score: float
    complexity: Optional[int] = None

    def __post_init__(self):
        if len(self.assessments) != ASSESSMENT_COUNT:
            raise ValueError(f"expected {ASSESSMENT_COUNT} assessments")
        if not 0.0 <= self.final_score <= 7.0:
            raise ValueError("final_score outside 0..7")
        if self.complexity is not None and not 1 <= self.complexity <= 10:
            raise OutOfRange(f"complexity {self.complexity} outside 1..10")

    def to_dict(self) -> dict:
        return {
            "met_lists": [sorted(a.met) for a in self.assessments],
            "final_score": self.final_score,
            "complexity": self.complexity,
        }


_STANDARDS_MET = re.compile(r"\**Standards Met\**\s*:", re.IGNORECASE)
_BRACKET_LIST = re.compile(r"\[([^\[\]]*)\]")


def parse_standards_met(text: str) -> CriteriaAssessment:
    """Extract the bracketed integer list after the final Standards Met marker."""
    markers = list(_STANDARDS_MET.finditer(text))
    if not markers:
        raise ParseFailure("no Standards Met marker", text[-200:])
    tail = text[markers[-1].end():]
    m = _BRACKET_LIST.search(tail)
    if m is None:
        raise ParseFailure("no bracketed list after Standards Met", tail[:200])
    payload = m.group(1).strip()
    met: Set[int] = set()
    if payload:
        for token in payload.split(","):
            token = token.strip()
            if not re.fullmatch(r"\d+", token):
                raise ParseFailure(f"non-integer criterion {token!r}", payload)
            value = int(token)
            if value not in CRITERIA_RANGE:
                raise OutOfRange(f"criterion {value} outside 1..7")
            met.add(value)
    return CriteriaAssessment(met=frozenset(met), raw_text=text)


def final_score(assessments: Sequence[CriteriaAssessment]) -> float:
    return sum(a.score for a in assessments) / len(assessments)


def score_prompt(
    prompt: str,
    gateway: Gateway,
    mode: str,
    model: str,
    temperature: float = 0.7,
    max_tokens: int = 2048,
) -> ScoreCard:
    """Judge one prompt with three assessments and average the met counts."""
    rendered = render(QUALITY_FILTER, {"prompt": prompt})
    req = CompletionRequest(
        prompt=rendered.text, model=model, temperature=temperature, max_tokens=max_tokens
    )
    assessments: List[CriteriaAssessment] = []
    failures: List[str] = []
    for _ in range(ASSESSMENT_COUNT):
        try:
            result = gateway.complete(req, mode)
            assessments.append(parse_standards_met(result.text))
        except RecordError as exc:
            failures.append(str(exc))
    if len(assessments) < ASSESSMENT_COUNT:
        raise ScoringIncomplete(
            f"{len(assessments)}/{ASSESSMENT_COUNT} parseable assessments; {failures}"
        )
    return ScoreCard(assessments=tuple(assessments), final_score=final_score(assessments))


def filter_by_score(records: Sequence, threshold: float = SCORE_CUTOFF) -> Tuple[list, list]:
    """Partition records (anything with a .scorecard) into (kept, dropped)."""
    kept, dropped = [], []
    for record in records:
        if record.scorecard is not None and record.scorecard.final_score >= threshold:
            kept.append(record)
        else:
            dropped.append(record)
    return kept, dropped


_JSON_OUTPUT = re.compile(r"\**Json Output\**\s*:?", re.IGNORECASE)
_JSON_OBJECT = re.compile(r"\{[^{}]*\}", re.DOTALL)
_SCORE_INT = re.compile(r"\b(\d{1,2})\b")


def parse_complexity(text: str) -> int:
    """Read the difficulty score from the response's final structured section."""
    markers = list(_JSON_OUTPUT.finditer(text))
    if not markers:
        raise ParseFailure("no Json Output section", text[-200:])
    tail = text[markers[-1].end():]
    score: Optional[int] = None
    obj_match = _JSON_OBJECT.search(tail)
    if obj_match is not None:
        try:
            obj = json.loads(obj_match.group(0))
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict):
            for key in ("score", "Score", "difficulty", "difficulty_score"):
                if key in obj and isinstance(obj[key], (int, float)):
                    score = int(obj[key])
                    break
    if score is None:
        m = _SCORE_INT.search(tail)
        if m is None:
            raise ParseFailure("no score in Json Output section", tail[:200])
        score = int(m.group(1))
    if not 1 <= score <= 10:
        raise OutOfRange(f"complexity score {score} outside 1..10")
    return score


@dataclass(frozen=True)
class DistributionStats:
    mean: float
    median: float
    std: float  # population standard deviation
    count: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "median": self.median, "std": self.std, "count": self.count}


def distribution_stats(scores: Sequence[int]) -> DistributionStats:
    if not scores:
        raise EmptyInput("no scores")
    return DistributionStats(
        mean=statistics.fmean(scores),
        median=float(statistics.median(scores)),
        std=statistics.pstdev(scores),
        count=len(scores),
    )
