from .records import (
    InstructionRecord,
    LineageEntry,
    StageManifest,
    read_jsonl,
    read_records,
    write_jsonl,
    write_records,
)
from .stages import derive_seed, run_stage, stage_digest, try_resume
from .reverse import LowScore, run_reverse_flow
from .backfeed import DuplicateGroup, run_backfeed_flow
from .finalize import (
    extract_snippet_stage,
    report,
    run_all,
    run_complexity_stage,
    run_gate_stage,
    run_response_stage,
)

__all__ = [
    "InstructionRecord",
    "LineageEntry",
    "StageManifest",
    "read_jsonl",
    "read_records",
    "write_jsonl",
    "write_records",
    "derive_seed",
    "run_stage",
    "stage_digest",
    "try_resume",
    "LowScore",
    "run_reverse_flow",
    "DuplicateGroup",
    "run_backfeed_flow",
    "extract_snippet_stage",
    "report",
    "run_all",
    "run_complexity_stage",
    "run_gate_stage",
    "run_response_stage",
]
