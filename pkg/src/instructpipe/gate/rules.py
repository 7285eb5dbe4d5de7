"""Analyzer rule configuration: disabled / error / info tiers per tool.

Unlisted rules follow the default policy: findings the tool itself
classes as fatal or error become error tier, everything else info.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Set

import yaml

from .report import Severity

TOOLS = ("pylint", "eslint", "checkstyle", "clang-tidy", "sqlfluff")


@dataclass
class ToolRules:
    disabled: Set[str] = field(default_factory=set)
    error: Set[str] = field(default_factory=set)
    info: Set[str] = field(default_factory=set)

    def __post_init__(self):
        overlap = (self.disabled & self.error) | (self.disabled & self.info) | (self.error & self.info)
        if overlap:
            raise ValueError(f"rules listed in more than one tier: {sorted(overlap)}")

    def classify(self, rule_ids: Set[str], native_error: bool) -> Optional[Severity]:
        """Tier for a finding known under any of ``rule_ids``; None = disabled."""
        if rule_ids & self.disabled:
            return None
        if rule_ids & self.error:
            return Severity.ERROR
        if rule_ids & self.info:
            return Severity.INFO
        return Severity.ERROR if native_error else Severity.INFO


@dataclass
class RuleConfig:
    tools: Dict[str, ToolRules] = field(default_factory=dict)

    def for_tool(self, tool: str) -> ToolRules:
        return self.tools.setdefault(tool, ToolRules())


def load_rule_config(path: str | Path) -> RuleConfig:
    """Load a YAML mapping tool -> {disabled: [...], error: [...], info: [...]}."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    tools: Dict[str, ToolRules] = {}
    for tool, spec in raw.items():
        spec = spec or {}
        tools[tool] = ToolRules(
            disabled=set(spec.get("disabled", []) or []),
            error=set(spec.get("error", []) or []),
            info=set(spec.get("info", []) or []),
        )
    return RuleConfig(tools=tools)
