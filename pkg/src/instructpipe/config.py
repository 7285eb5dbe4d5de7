"""Run configuration with CLI > environment > config file precedence.

Credentials are deliberately absent: the endpoint and API key are read
from environment variables by the gateway and never from config files.
"""

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

ENV_PREFIX = "INSTRUCTPIPE_"


@dataclass
class PipelineConfig:
    model: str = "gpt-4o"
    judge_model: str = ""  # empty -> same as model
    temperature: float = 0.7
    judge_temperature: float = 0.7
    max_tokens: int = 4096
    mode: str = "replay"  # live | record | replay
    cassette: str = "cassette.jsonl"
    seed: int = 0
    jobs: int = 4
    snippets_per_doc: int = 2
    combo_count: int = 10
    combo_min: int = 4
    combo_max: int = 8
    score_threshold: float = 6.0
    dedup_threshold: float = 0.8
    rules: str = ""  # optional rule config path; empty -> default policy only

    def __post_init__(self):
        if self.mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.combo_min <= self.combo_max:
            raise ValueError("combo_min/combo_max out of order")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @property
    def effective_judge_model(self) -> str:
        return self.judge_model or self.model


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def _coerce(name: str, value: Any) -> Any:
    target = _FIELD_TYPES[name]
    if target in ("int", int):
        return int(value)
    if target in ("float", float):
        return float(value)
    return str(value)


def load_config(
    path: Optional[str | Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> PipelineConfig:
    """Merge config file, environment (INSTRUCTPIPE_*), and explicit overrides.

    Precedence, lowest to highest: built-in defaults, config file,
    environment, overrides (CLI flags). Unknown file keys are rejected so
    typos fail loudly.
    """
    env = os.environ if env is None else env
    merged: Dict[str, Any] = {}

    if path:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(raw, dict):
            raise ValueError(f"config file {path} must be a mapping")
        unknown = set(raw) - set(_FIELD_TYPES)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(raw)

    for name in _FIELD_TYPES:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            merged[name] = env[env_key]

    if overrides:
        for name, value in overrides.items():
            if value is not None:
                merged[name] = value

    merged = {k: _coerce(k, v) for k, v in merged.items() if k in _FIELD_TYPES}
    return PipelineConfig(**merged)
