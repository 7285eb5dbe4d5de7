from .blocks import CodeBlock, extract_blocks, normalize_fence_language
from .report import LintIssue, LintReport, Position, Severity
from .rules import RuleConfig, ToolRules, load_rule_config
from .analyzers import normalize_native_output, TOOL_FOR_LANGUAGE
from .runner import analyze_block, analyze_blocks, gate_pair, GateVerdict

__all__ = [
    "CodeBlock",
    "extract_blocks",
    "normalize_fence_language",
    "LintIssue",
    "LintReport",
    "Position",
    "Severity",
    "RuleConfig",
    "ToolRules",
    "load_rule_config",
    "normalize_native_output",
    "TOOL_FOR_LANGUAGE",
    "analyze_block",
    "analyze_blocks",
    "gate_pair",
    "GateVerdict",
]
