"""Pure parsers from each analyzer's machine-readable output to LintIssue.

These run on recorded output fixtures just as well as on live subprocess
output, so the parser suite needs no analyzers installed. Disabled rules
are dropped here; tier assignment follows the rule config.
"""

import json
import re
import xml.etree.ElementTree as ET
from typing import List, Optional, Sequence

from .report import LintIssue, Position, Severity
from .rules import RuleConfig
from ..errors import OutputParseFailure

# normalized language tag -> (tool, display name)
TOOL_FOR_LANGUAGE = {
    "python": ("pylint", "Python"),
    "javascript": ("eslint", "JavaScript"),
    "java": ("checkstyle", "Java"),
    "c_cpp": ("clang-tidy", "C++"),
    "sql": ("sqlfluff", "SQL"),
}

DISPLAY_NAMES = {tool: name for tool, name in TOOL_FOR_LANGUAGE.values()}


def _as_text(output: bytes | str) -> str:
    if isinstance(output, bytes):
        return output.decode("utf-8", errors="replace")
    return output


def _content_at(source_lines: Optional[Sequence[str]], line: int) -> str:
    if source_lines is None or not 1 <= line <= len(source_lines):
        return ""
    return source_lines[line - 1]


def normalize_native_output(
    tool_output: bytes | str,
    tool: str,
    config: RuleConfig,
    source_lines: Optional[Sequence[str]] = None,
) -> List[LintIssue]:
    """Map one tool's native findings onto the unified issue schema."""
    parser = _PARSERS.get(tool)
    if parser is None:
        raise OutputParseFailure(f"unknown tool {tool!r}", _as_text(tool_output)[:80])
    return parser(_as_text(tool_output), config, source_lines)


def _emit(
    issues: List[LintIssue],
    config: RuleConfig,
    tool: str,
    rule_ids: set,
    native_error: bool,
    rule_name: str,
    message: str,
    start_line: int,
    end_line: Optional[int],
    language: str,
    source_lines: Optional[Sequence[str]],
    file_path: Optional[str] = None,
    content: Optional[str] = None,
) -> None:
    severity = config.for_tool(tool).classify(rule_ids, native_error)
    if severity is None:
        return
    end = end_line if end_line is not None else start_line
    issues.append(
        LintIssue(
            rule_name=rule_name,
            message=message,
            position=Position(start_line=start_line, end_line=max(start_line, end)),
            severity=severity,
            content=content if content is not None else _content_at(source_lines, start_line),
            language=language,
            file_path=file_path,
        )
    )


def _parse_pylint(text: str, config: RuleConfig, source_lines) -> List[LintIssue]:
    if not text.strip():
        return []
    try:
        findings = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OutputParseFailure(f"pylint JSON: {exc}", text[:200]) from exc
    if not isinstance(findings, list):
        raise OutputParseFailure("pylint JSON is not a list", text[:200])
    issues: List[LintIssue] = []
    for f in findings:
        if not isinstance(f, dict):
            raise OutputParseFailure("pylint finding is not an object", text[:200])
        msg_id = str(f.get("message-id", ""))
        symbol = str(f.get("symbol", ""))
        rule_name = f"{msg_id}:{symbol}" if msg_id or symbol else "unknown"
        native_error = str(f.get("type", "")).lower() in ("error", "fatal")
        line = int(f.get("line", 1) or 1)
        end_line = f.get("endLine")
        _emit(
            issues, config, "pylint",
            rule_ids={msg_id, symbol, rule_name} - {""},
            native_error=native_error,
            rule_name=rule_name,
            message=str(f.get("message", "")),
            start_line=line,
            end_line=int(end_line) if end_line else None,
            language="Python",
            source_lines=source_lines,
        )
    return issues


def _parse_eslint(text: str, config: RuleConfig, source_lines) -> List[LintIssue]:
    if not text.strip():
        return []
    try:
        files = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OutputParseFailure(f"eslint JSON: {exc}", text[:200]) from exc
    if not isinstance(files, list):
        raise OutputParseFailure("eslint JSON is not a list", text[:200])
    issues: List[LintIssue] = []
    for file_result in files:
        if not isinstance(file_result, dict):
            raise OutputParseFailure("eslint file entry is not an object", text[:200])
        for m in file_result.get("messages", []):
            if not isinstance(m, dict):
                raise OutputParseFailure("eslint message is not an object", text[:200])
            rule_id = m.get("ruleId") or "parsing-error"
            native_error = bool(m.get("fatal")) or int(m.get("severity", 1)) >= 2
            line = int(m.get("line", 1) or 1)
            _emit(
                issues, config, "eslint",
                rule_ids={rule_id},
                native_error=native_error,
                rule_name=rule_id,
                message=str(m.get("message", "")),
                start_line=line,
                end_line=int(m["endLine"]) if m.get("endLine") else None,
                language="JavaScript",
                source_lines=source_lines,
            )
    return issues


def _parse_checkstyle(text: str, config: RuleConfig, source_lines) -> List[LintIssue]:
    if not text.strip():
        return []
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise OutputParseFailure(f"checkstyle XML: {exc}", text[:200]) from exc
    issues: List[LintIssue] = []
    for file_el in root.iter("file"):
        for err in file_el.iter("error"):
            source = err.get("source", "")
            short = source.rsplit(".", 1)[-1] if source else ""
            native_sev = err.get("severity", "error").lower()
            rule_name = short or native_sev
            _emit(
                issues, config, "checkstyle",
                rule_ids={source, short, rule_name} - {""},
                native_error=native_sev == "error",
                rule_name=rule_name,
                message=err.get("message", ""),
                start_line=int(err.get("line", 1) or 1),
                end_line=None,
                language="Java",
                source_lines=source_lines,
            )
    return issues


# clang-tidy / compiler style: path:line:col: level: message [checks]
_CLANG_DIAG = re.compile(
    r"^(?P<path>[^:\n]*):(?P<line>\d+):(?:\d+:)?\s*"
    r"(?P<level>error|warning|note|fatal error):\s*(?P<message>.*?)"
    r"(?:\s*\[(?P<checks>[^\[\]]+)\])?$"
)


def _parse_clang_tidy(text: str, config: RuleConfig, source_lines) -> List[LintIssue]:
    issues: List[LintIssue] = []
    pending = None  # (rule_ids, native_error, rule_name, message_lines, line, path)
    def flush():
        if pending is None:
            return
        rule_ids, native_error, rule_name, message_lines, line, path = pending
        _emit(
            issues, config, "clang-tidy",
            rule_ids=rule_ids,
            native_error=native_error,
            rule_name=rule_name,
            message="\n".join(message_lines),
            start_line=line,
            end_line=None,
            language="C++",
            source_lines=source_lines,
            file_path=path,
        )
    for raw_line in text.splitlines():
        m = _CLANG_DIAG.match(raw_line)
        if m is not None:
            if m.group("level") == "note":
                if pending is not None:
                    pending[3].append(m.group("message"))
                continue
            flush()
            checks = m.group("checks")
            level = m.group("level").split()[-1]  # "fatal error" -> "error"
            rule_name = checks if checks else level
            rule_ids = set(checks.split(",")) if checks else {level}
            pending = (
                {r.strip() for r in rule_ids},
                "error" in m.group("level"),
                rule_name,
                [m.group("message")],
                int(m.group("line")),
                m.group("path") or None,
            )
        elif (
            pending is not None
            and raw_line.strip()
            and not raw_line.startswith(("Error while", "Found "))
            and not re.match(r"\d+ (error|warning)", raw_line)
        ):
            pending[3].append(raw_line)
    flush()
    return issues


def _parse_sqlfluff(text: str, config: RuleConfig, source_lines) -> List[LintIssue]:
    if not text.strip():
        return []
    try:
        files = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OutputParseFailure(f"sqlfluff JSON: {exc}", text[:200]) from exc
    if not isinstance(files, list):
        raise OutputParseFailure("sqlfluff JSON is not a list", text[:200])
    issues: List[LintIssue] = []
    for file_result in files:
        if not isinstance(file_result, dict):
            raise OutputParseFailure("sqlfluff file entry is not an object", text[:200])
        for v in file_result.get("violations", []):
            if not isinstance(v, dict):
                raise OutputParseFailure("sqlfluff violation is not an object", text[:200])
            code = str(v.get("code", ""))
            name = str(v.get("name", "") or "")
            rule_name = f"{code}:{name}"
            line = int(v.get("start_line_no", v.get("line_no", 1)) or 1)
            end_line = v.get("end_line_no")
            # Parse and templating failures are the tool's hard errors.
            native_error = code.upper() in ("PRS", "TMP")
            _emit(
                issues, config, "sqlfluff",
                rule_ids={code, name, rule_name} - {""},
                native_error=native_error,
                rule_name=rule_name,
                message=str(v.get("description", "")),
                start_line=line,
                end_line=int(end_line) if end_line else None,
                language="SQL",
                source_lines=source_lines,
            )
    return issues


_PARSERS = {
    "pylint": _parse_pylint,
    "eslint": _parse_eslint,
    "checkstyle": _parse_checkstyle,
    "clang-tidy": _parse_clang_tidy,
    "sqlfluff": _parse_sqlfluff,
}
