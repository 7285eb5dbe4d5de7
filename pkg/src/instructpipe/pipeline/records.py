"""Pipeline record and manifest types plus line-delimited JSON I/O.

Stage files hold one record object per line so runs stream, resume, and
diff cleanly. Manifests carry the conservation counts (in = out +
rejected) and the params digest used for resume checks. Paths inside
manifests are stored relative to the run directory so two runs over the
same inputs produce byte-identical manifests wherever they live.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional

from ..scoring import CriteriaAssessment, ScoreCard

FLOWS = ("reverse", "backfeed")


@dataclass(frozen=True)
class LineageEntry:
    stage: str
    input_ids: tuple
    params_digest: str

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "input_ids": list(self.input_ids),
            "params_digest": self.params_digest,
        }

    @staticmethod
    def from_dict(d: dict) -> "LineageEntry":
        return LineageEntry(
            stage=d["stage"],
            input_ids=tuple(d.get("input_ids", [])),
            params_digest=d.get("params_digest", ""),
        )


@dataclass
class InstructionRecord:
    id: str
    flow: str  # reverse | backfeed
    problem_type: str  # one of the seven type names
    language: str  # normalized tag
    prompt: str
    response: Optional[str] = None
    lineage: List[LineageEntry] = field(default_factory=list)
    scorecard: Optional[ScoreCard] = None
    gate: Optional[dict] = None  # verdict + reports, as emitted by the gate

    def __post_init__(self):
        if self.flow not in FLOWS:
            raise ValueError(f"unknown flow {self.flow!r}")
        if self.response is not None and not self.prompt:
            raise ValueError("response present without a prompt")

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "flow": self.flow,
            "problem_type": self.problem_type,
            "language": self.language,
            "prompt": self.prompt,
            "lineage": [e.to_dict() for e in self.lineage],
        }
        if self.response is not None:
            d["response"] = self.response
        if self.scorecard is not None:
            d["scorecard"] = self.scorecard.to_dict()
        if self.gate is not None:
            d["gate"] = self.gate
        return d

    @staticmethod
    def from_dict(d: dict) -> "InstructionRecord":
        scorecard = None
        if d.get("scorecard") is not None:
            sc = d["scorecard"]
            scorecard = ScoreCard(
                assessments=tuple(
                    CriteriaAssessment(met=frozenset(met), raw_text="")
                    for met in sc["met_lists"]
                ),
                final_score=sc["final_score"],
                complexity=sc.get("complexity"),
            )
        return InstructionRecord(
            id=d["id"],
            flow=d["flow"],
            problem_type=d["problem_type"],
            language=d.get("language", "other"),
            prompt=d["prompt"],
            response=d.get("response"),
            lineage=[LineageEntry.from_dict(e) for e in d.get("lineage", [])],
            scorecard=scorecard,
            gate=d.get("gate"),
        )


@dataclass
class StageManifest:
    stage: str
    input_path: str  # relative to the run directory
    output_path: str
    rejects_path: str
    rng_seed: int
    counts: dict  # {"in": n, "out": n, "rejected": n}
    params_digest: str = ""
    extra: dict = field(default_factory=dict)

    def check(self) -> None:
        if self.counts["in"] != self.counts["out"] + self.counts["rejected"]:
            raise ValueError(
                f"stage {self.stage}: in={self.counts['in']} != "
                f"out={self.counts['out']} + rejected={self.counts['rejected']}"
            )

    def to_dict(self) -> dict:
        d = {
            "stage": self.stage,
            "input_path": self.input_path,
            "output_path": self.output_path,
            "rejects_path": self.rejects_path,
            "rng_seed": self.rng_seed,
            "counts": self.counts,
            "params_digest": self.params_digest,
        }
        if self.extra:
            d["extra"] = self.extra
        return d

    @staticmethod
    def from_dict(d: dict) -> "StageManifest":
        return StageManifest(
            stage=d["stage"],
            input_path=d["input_path"],
            output_path=d["output_path"],
            rejects_path=d["rejects_path"],
            rng_seed=d["rng_seed"],
            counts=d["counts"],
            params_digest=d.get("params_digest", ""),
            extra=d.get("extra", {}),
        )


def dump_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def write_jsonl(path: str | Path, objects: Iterable[dict]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        for obj in objects:
            fh.write(dump_line(obj) + "\n")
            count += 1
    return count


def read_jsonl(path: str | Path) -> List[dict]:
    out: List[dict] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out


def write_records(path: str | Path, records: Iterable[InstructionRecord]) -> int:
    return write_jsonl(path, (r.to_dict() for r in records))


def read_records(path: str | Path) -> List[InstructionRecord]:
    return [InstructionRecord.from_dict(d) for d in read_jsonl(path)]
