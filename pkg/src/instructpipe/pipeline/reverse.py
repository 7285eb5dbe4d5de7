"""Reverse flow: code snippet -> problem -> complication -> rewrite -> filter."""

import hashlib
import logging
import random
from pathlib import Path
from typing import List, Tuple

from .records import InstructionRecord, LineageEntry, StageManifest
from .stages import derive_seed, run_stage, stage_digest
from ..config import PipelineConfig
from ..corpus import CodeSnippet, normalize_language
from ..errors import RecordError
from ..gateway import CompletionRequest, Gateway
from ..prompts import (
    COMPLICATE,
    COMPLICATE_METHODS,
    TEXT_REWRITE,
    ProblemType,
    parse_complicate_output,
    parse_reverse_output,
    parse_rewrite_output,
    render,
    reverse_question,
)
from ..scoring import score_prompt

logger = logging.getLogger(__name__)


def complete_text(gateway: Gateway, cfg: PipelineConfig, prompt: str) -> str:
    req = CompletionRequest(
        prompt=prompt,
        model=cfg.model,
        temperature=cfg.temperature,
        max_tokens=cfg.max_tokens,
    )
    return gateway.complete(req, cfg.mode).text


def _record_id(*parts) -> str:
    return hashlib.sha1("|".join(str(p) for p in parts).encode("utf-8")).hexdigest()[:16]


def generate_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    types = list(ProblemType)

    def fn(snippet: CodeSnippet) -> InstructionRecord:
        rng = random.Random(derive_seed(cfg.seed, "reverse_generate", snippet.id))
        ptype = rng.choice(types)
        rendered = render(reverse_question(ptype), {"code_snippet": snippet.text})
        text = complete_text(gateway, cfg, rendered.text)
        parsed = parse_reverse_output(text, problem_type=ptype, lineage=snippet.id)
        return InstructionRecord(
            id=_record_id("reverse", snippet.id, ptype.value),
            flow="reverse",
            problem_type=ptype.value,
            language=normalize_language(parsed.language),
            prompt=parsed.description,
            lineage=[LineageEntry("reverse_generate", (snippet.id,), rendered.params_digest)],
        )

    return fn


def complicate_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    def fn(record: InstructionRecord) -> InstructionRecord:
        rng = random.Random(derive_seed(cfg.seed, "reverse_complicate", record.id))
        method = rng.choice(COMPLICATE_METHODS)
        directive = f"# Required Complexity Method\nUse the {method} method for this rewrite."
        rendered = render(
            COMPLICATE, {"prompt": record.prompt, "method_directive": directive}
        )
        text = complete_text(gateway, cfg, rendered.text)
        record.prompt = parse_complicate_output(text)
        record.lineage.append(
            LineageEntry("reverse_complicate", (record.id,), rendered.params_digest)
        )
        return record

    return fn


def rewrite_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    def fn(record: InstructionRecord) -> InstructionRecord:
        rendered = render(TEXT_REWRITE, {"question": record.prompt})
        text = complete_text(gateway, cfg, rendered.text)
        record.prompt = parse_rewrite_output(text)
        record.lineage.append(
            LineageEntry("reverse_rewrite", (record.id,), rendered.params_digest)
        )
        return record

    return fn


def quality_stage_fn(cfg: PipelineConfig, gateway: Gateway, stage: str):
    def fn(record: InstructionRecord) -> InstructionRecord:
        card = score_prompt(
            record.prompt,
            gateway,
            cfg.mode,
            model=cfg.effective_judge_model,
            temperature=cfg.judge_temperature,
        )
        record.scorecard = card
        if card.final_score < cfg.score_threshold:
            raise LowScore(f"final score {card.final_score} < {cfg.score_threshold}")
        record.lineage.append(LineageEntry(stage, (record.id,), ""))
        return record

    return fn


class LowScore(RecordError):
    """Quality filter rejection: below the score cutoff."""


def run_reverse_flow(
    snippets: List[CodeSnippet],
    out_dir: Path,
    cfg: PipelineConfig,
    gateway: Gateway,
) -> Tuple[List[InstructionRecord], List[StageManifest]]:
    manifests: List[StageManifest] = []
    common = {
        "seed": cfg.seed, "mode": cfg.mode, "model": cfg.model,
        "temperature": cfg.temperature, "max_tokens": cfg.max_tokens,
    }

    dicts, manifest = run_stage(
        "reverse_generate", snippets, generate_stage_fn(cfg, gateway),
        out_dir, input_path="snippets.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest("reverse_generate", **common),
        jobs=cfg.jobs,
    )
    manifests.append(manifest)
    records = [InstructionRecord.from_dict(d) for d in dicts]

    dicts, manifest = run_stage(
        "reverse_complicate", records, complicate_stage_fn(cfg, gateway),
        out_dir, input_path="reverse_generate.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest("reverse_complicate", **common),
        jobs=cfg.jobs,
    )
    manifests.append(manifest)
    records = [InstructionRecord.from_dict(d) for d in dicts]

    dicts, manifest = run_stage(
        "reverse_rewrite", records, rewrite_stage_fn(cfg, gateway),
        out_dir, input_path="reverse_complicate.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest("reverse_rewrite", **common),
        jobs=cfg.jobs,
    )
    manifests.append(manifest)
    records = [InstructionRecord.from_dict(d) for d in dicts]

    dicts, manifest = run_stage(
        "reverse_quality", records,
        quality_stage_fn(cfg, gateway, "reverse_quality"),
        out_dir, input_path="reverse_rewrite.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest(
            "reverse_quality", threshold=cfg.score_threshold,
            judge_model=cfg.effective_judge_model,
            judge_temperature=cfg.judge_temperature, **common,
        ),
        jobs=cfg.jobs,
    )
    manifests.append(manifest)
    records = [InstructionRecord.from_dict(d) for d in dicts]
    return records, manifests
