"""Unified lint report schema.

Field names and nesting match the printed per-response reports exactly
({issues: [{rule_name, message, position{start_line, end_line}, severity,
content, language, file_path?}], status}), so recorded reports can be
used as golden files.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional


class Severity(str, Enum):
    ERROR = "error"
    INFO = "info"


@dataclass(frozen=True)
class Position:
    start_line: int
    end_line: int

    def __post_init__(self):
        if self.start_line > self.end_line:
            raise ValueError("start_line > end_line")

    def to_dict(self) -> dict:
        return {"start_line": self.start_line, "end_line": self.end_line}


@dataclass(frozen=True)
class LintIssue:
    rule_name: str
    message: str
    position: Position
    severity: Severity
    content: str
    language: str  # display name, e.g. "Python"
    file_path: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "rule_name": self.rule_name,
            "message": self.message,
            "position": self.position.to_dict(),
            "severity": self.severity.value,
            "content": self.content,
            "language": self.language,
        }
        if self.file_path is not None:
            d["file_path"] = self.file_path
        return d


@dataclass
class LintReport:
    issues: List[LintIssue]
    status: str  # "pass" | "fail"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = "fail" if any(i.severity is Severity.ERROR for i in self.issues) else "pass"
        if self.status != expected:
            raise ValueError(f"status {self.status!r} inconsistent with issues")

    @staticmethod
    def from_issues(issues: List[LintIssue], meta: Optional[dict] = None) -> "LintReport":
        status = "fail" if any(i.severity is Severity.ERROR for i in issues) else "pass"
        return LintReport(issues=issues, status=status, meta=meta or {})

    def to_dict(self) -> dict:
        d = {"issues": [i.to_dict() for i in self.issues], "status": self.status}
        if self.meta:
            d["meta"] = self.meta
        return d
