"""Analyzer subprocess orchestration and the per-record code gate.

Single blocks go through analyze_block. Large batches go through
analyze_blocks, which groups blocks by language and hands each analyzer
all of its files in one invocation; per-file subprocesses are far too
slow for corpus-scale runs.
"""

import json
import logging
import shutil
import subprocess
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .analyzers import TOOL_FOR_LANGUAGE, normalize_native_output
from .blocks import CodeBlock, extract_blocks
from .report import LintIssue, LintReport, Severity
from .rules import RuleConfig
from ..errors import AnalyzerCrash, AnalyzerMissing, OutputParseFailure

logger = logging.getLogger(__name__)

_SUFFIX = {
    "pylint": ".py",
    "eslint": ".js",
    "checkstyle": ".java",
    "clang-tidy": ".cpp",
    "sqlfluff": ".sql",
}

_SUBPROCESS_TIMEOUT = 300

# Minimal checkstyle config: checker shell only, so findings come from
# the tool's own parse and TreeWalker defaults added below.
_CHECKSTYLE_CONFIG = """<?xml version="1.0"?>
<!DOCTYPE module PUBLIC
  "-//Checkstyle//DTD Checkstyle Configuration 1.3//EN"
  "https://checkstyle.org/dtds/configuration_1_3.dtd">
<module name="Checker">
  <module name="TreeWalker">
    <module name="EmptyBlock"/>
    <module name="EqualsHashCode"/>
    <module name="IllegalImport"/>
    <module name="UnusedImports"/>
  </module>
</module>
"""


def _eslint_flat_config(config: RuleConfig) -> str:
    rules = {}
    tool_rules = config.for_tool("eslint")
    for rule in sorted(tool_rules.error):
        rules[rule] = "error"
    for rule in sorted(tool_rules.info):
        rules[rule] = "warn"
    return f"export default [{{ rules: {json.dumps(rules)} }}];\n"


def tool_executable(tool: str) -> Optional[str]:
    return shutil.which(tool)


def tool_version(tool: str) -> Optional[str]:
    exe = tool_executable(tool)
    if exe is None:
        return None
    try:
        proc = subprocess.run(
            [exe, "--version"], capture_output=True, text=True, timeout=60
        )
    except (OSError, subprocess.TimeoutExpired):
        return None
    line = (proc.stdout or proc.stderr).strip().splitlines()
    return line[0] if line else None


def _build_command(
    tool: str, exe: str, files: Sequence[str], workdir: Path, config: RuleConfig
) -> List[str]:
    if tool == "pylint":
        return [exe, "--output-format=json", "--persistent=no", "--score=no", *files]
    if tool == "eslint":
        cfg = workdir / "eslint.config.mjs"
        cfg.write_text(_eslint_flat_config(config), encoding="utf-8")
        return [exe, "--format", "json", "--no-error-on-unmatched-pattern",
                "--config", str(cfg), *files]
    if tool == "checkstyle":
        cfg = workdir / "checkstyle.xml"
        cfg.write_text(_CHECKSTYLE_CONFIG, encoding="utf-8")
        return [exe, "-f", "xml", "-c", str(cfg), *files]
    if tool == "clang-tidy":
        # language standard fixed so mixed C / C++ fences compile the same way
        return [exe, "--quiet", *files, "--", "-std=c++17"]
    if tool == "sqlfluff":
        return [exe, "lint", "--format", "json", "--dialect", "ansi", *files]
    raise AnalyzerMissing(tool)


# Section marker inserted between per-file clang-tidy runs; diagnostics in a
# section belong to that file even when their paths point into system headers.
_CLANG_FILE_MARKER = "==== analyzing-file:"


def _run_tool(
    tool: str, files: Sequence[str], workdir: Path, config: RuleConfig
) -> str:
    exe = tool_executable(tool)
    if exe is None:
        raise AnalyzerMissing(tool)
    if tool == "clang-tidy":
        # Template errors surface with system-header paths, so batch output
        # cannot be split by path; run per file and mark each section.
        sections = []
        for file in files:
            cmd = _build_command(tool, exe, [file], workdir, config)
            try:
                proc = subprocess.run(
                    cmd, capture_output=True, text=True,
                    timeout=_SUBPROCESS_TIMEOUT, cwd=workdir,
                )
            except subprocess.TimeoutExpired as exc:
                raise AnalyzerCrash(f"{tool} timed out after {_SUBPROCESS_TIMEOUT}s") from exc
            except OSError as exc:
                raise AnalyzerCrash(f"{tool} failed to start: {exc}") from exc
            sections.append(f"{_CLANG_FILE_MARKER} {file}")
            sections.append(proc.stdout + "\n" + proc.stderr)
        return "\n".join(sections)
    cmd = _build_command(tool, exe, files, workdir, config)
    try:
        proc = subprocess.run(
            cmd, capture_output=True, text=True,
            timeout=_SUBPROCESS_TIMEOUT, cwd=workdir,
        )
    except subprocess.TimeoutExpired as exc:
        raise AnalyzerCrash(f"{tool} timed out after {_SUBPROCESS_TIMEOUT}s") from exc
    except OSError as exc:
        raise AnalyzerCrash(f"{tool} failed to start: {exc}") from exc
    output = proc.stdout
    if not output.strip() and proc.returncode not in (0, 1):
        raise AnalyzerCrash(
            f"{tool} exited {proc.returncode} without parseable output: "
            f"{proc.stderr.strip()[:300]}"
        )
    return output


# --- per-file splitting of batch output ---------------------------------

def _split_json_by_key(output: str, key: str) -> Dict[str, str]:
    try:
        items = json.loads(output)
    except json.JSONDecodeError as exc:
        raise OutputParseFailure(f"batch JSON: {exc}", output[:200]) from exc
    buckets: Dict[str, list] = {}
    for item in items:
        path = str(Path(str(item.get(key, ""))).resolve())
        buckets.setdefault(path, []).append(item)
    return {path: json.dumps(items) for path, items in buckets.items()}


def _split_checkstyle(output: str) -> Dict[str, str]:
    try:
        root = ET.fromstring(output)
    except ET.ParseError as exc:
        raise OutputParseFailure(f"checkstyle XML: {exc}", output[:200]) from exc
    buckets: Dict[str, str] = {}
    for file_el in root.iter("file"):
        path = str(Path(file_el.get("name", "")).resolve())
        wrapper = ET.Element("checkstyle")
        wrapper.append(file_el)
        buckets[path] = ET.tostring(wrapper, encoding="unicode")
    return buckets


def _split_clang_tidy(output: str) -> Dict[str, str]:
    buckets: Dict[str, List[str]] = {}
    current: Optional[str] = None
    for line in output.splitlines():
        if line.startswith(_CLANG_FILE_MARKER):
            current = str(Path(line[len(_CLANG_FILE_MARKER):].strip()).resolve())
            buckets.setdefault(current, [])
            continue
        if current is not None:
            buckets[current].append(line)
    return {path: "\n".join(lines) for path, lines in buckets.items()}


def _split_batch_output(tool: str, output: str) -> Dict[str, str]:
    if tool == "pylint":
        return _split_json_by_key(output, "path")
    if tool == "eslint":
        return _split_json_by_key(output, "filePath")
    if tool == "sqlfluff":
        return _split_json_by_key(output, "filepath")
    if tool == "checkstyle":
        return _split_checkstyle(output)
    if tool == "clang-tidy":
        return _split_clang_tidy(output)
    raise AnalyzerMissing(tool)


# --- public API ---------------------------------------------------------

def _skipped_report(tool_hint: str, reason: str) -> LintReport:
    return LintReport.from_issues([], meta={"skipped": reason, "tool": tool_hint})


def analyze_blocks(
    blocks: Sequence[CodeBlock],
    config: RuleConfig,
    worker_id: int = 0,
    keep_temp: bool = False,
) -> List[LintReport]:
    """One LintReport per block, index-aligned; analyzers run once per language."""
    reports: List[Optional[LintReport]] = [None] * len(blocks)
    by_tool: Dict[str, List[int]] = {}
    for i, block in enumerate(blocks):
        entry = TOOL_FOR_LANGUAGE.get(block.language)
        if entry is None:
            reports[i] = _skipped_report("none", f"unsupported language {block.language!r}")
            continue
        by_tool.setdefault(entry[0], []).append(i)

    tmp_root = tempfile.mkdtemp(prefix=f"instructpipe-gate-w{worker_id}-")
    try:
        for tool, indices in by_tool.items():
            workdir = Path(tmp_root) / tool
            workdir.mkdir()
            version = tool_version(tool)
            path_to_index: Dict[str, int] = {}
            files: List[str] = []
            for i in indices:
                path = workdir / f"block_{i:05d}{_SUFFIX[tool]}"
                path.write_text(blocks[i].body + "\n", encoding="utf-8")
                resolved = str(path.resolve())
                path_to_index[resolved] = i
                files.append(str(path))
            output = _run_tool(tool, files, workdir, config)
            per_file = _split_batch_output(tool, output)
            issue_map: Dict[int, List[LintIssue]] = {i: [] for i in indices}
            for resolved, chunk in per_file.items():
                i = path_to_index.get(resolved)
                if i is None:
                    continue
                source_lines = blocks[i].body.splitlines()
                issue_map[i] = normalize_native_output(chunk, tool, config, source_lines)
            for i in indices:
                meta = {"tool": tool}
                if version:
                    meta["tool_version"] = version
                reports[i] = LintReport.from_issues(issue_map[i], meta=meta)
    finally:
        if not keep_temp:
            shutil.rmtree(tmp_root, ignore_errors=True)
    return [r if r is not None else _skipped_report("none", "no report produced")
            for r in reports]


def analyze_block(
    block: CodeBlock, config: RuleConfig, worker_id: int = 0, keep_temp: bool = False
) -> LintReport:
    """Run the language's analyzer on one block."""
    if block.language == "other":
        return _skipped_report("none", f"unsupported language {block.info_string!r}")
    return analyze_blocks([block], config, worker_id=worker_id, keep_temp=keep_temp)[0]


@dataclass
class GateVerdict:
    status: str  # "pass" | "fail"
    reports: List[LintReport] = field(default_factory=list)
    no_code: bool = False

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "no_code": self.no_code,
            "reports": [r.to_dict() for r in self.reports],
        }


def verdict_from_reports(reports: Sequence[LintReport], had_blocks: bool) -> GateVerdict:
    if not had_blocks:
        return GateVerdict(status="pass", reports=[], no_code=True)
    status = "fail" if any(r.status == "fail" for r in reports) else "pass"
    return GateVerdict(status=status, reports=list(reports))


def gate_pair(
    response_text: str, config: RuleConfig, worker_id: int = 0
) -> Tuple[GateVerdict, List[CodeBlock]]:
    """Gate one prompt-response pair by its response's fenced code blocks.

    A response with zero code blocks passes and is marked no_code so the
    count can be audited separately.
    """
    blocks = extract_blocks(response_text)
    if not blocks:
        return verdict_from_reports([], had_blocks=False), []
    reports = analyze_blocks(blocks, config, worker_id=worker_id)
    return verdict_from_reports(reports, had_blocks=True), blocks
