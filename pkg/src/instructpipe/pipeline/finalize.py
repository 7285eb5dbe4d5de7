"""Final pipeline stages: complexity rating, response generation,
static-analysis gating, the end-to-end orchestrator, and the run report."""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .backfeed import run_backfeed_flow
from .records import (
    InstructionRecord,
    LineageEntry,
    StageManifest,
    write_jsonl,
    write_records,
)
from .reverse import complete_text, run_reverse_flow
from .stages import derive_seed, reject_entry, run_stage, stage_digest
from ..config import PipelineConfig
from ..corpus import CodeSnippet, dedup_snippets, load_corpus, sample_snippets
from ..errors import DocumentTooShort, ParseFailure
from ..gate import RuleConfig, extract_blocks, load_rule_config
from ..gate.runner import analyze_blocks, verdict_from_reports
from ..gateway import Cassette, CompletionRequest, Gateway
from ..prompts import COMPLEXITY_ASSESS, render
from ..scoring import ScoreCard, distribution_stats, parse_complexity

logger = logging.getLogger(__name__)


def complexity_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    def fn(record: InstructionRecord) -> InstructionRecord:
        if record.scorecard is None:
            raise ParseFailure("complexity rated before quality scoring", record.id)
        rendered = render(COMPLEXITY_ASSESS, {"question": record.prompt})
        req = CompletionRequest(
            prompt=rendered.text,
            model=cfg.effective_judge_model,
            temperature=cfg.judge_temperature,
            max_tokens=cfg.max_tokens,
        )
        score = parse_complexity(gateway.complete(req, cfg.mode).text)
        record.scorecard = ScoreCard(
            assessments=record.scorecard.assessments,
            final_score=record.scorecard.final_score,
            complexity=score,
        )
        record.lineage.append(LineageEntry("complexity", (record.id,), rendered.params_digest))
        return record

    return fn


def response_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    def fn(record: InstructionRecord) -> InstructionRecord:
        text = complete_text(gateway, cfg, record.prompt)
        if not text.strip():
            raise ParseFailure("empty response", record.id)
        record.response = text
        record.lineage.append(LineageEntry("respond", (record.id,), ""))
        return record

    return fn


def run_complexity_stage(records, out_dir: Path, cfg: PipelineConfig, gateway: Gateway):
    return run_stage(
        "complexity", records, complexity_stage_fn(cfg, gateway),
        out_dir, input_path="quality.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest(
            "complexity", seed=cfg.seed, mode=cfg.mode,
            judge_model=cfg.effective_judge_model,
            judge_temperature=cfg.judge_temperature,
        ),
        jobs=cfg.jobs,
    )


def run_response_stage(records, out_dir: Path, cfg: PipelineConfig, gateway: Gateway):
    return run_stage(
        "respond", records, response_stage_fn(cfg, gateway),
        out_dir, input_path="complexity.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest(
            "respond", seed=cfg.seed, mode=cfg.mode, model=cfg.model,
            temperature=cfg.temperature, max_tokens=cfg.max_tokens,
        ),
        jobs=cfg.jobs,
    )


def run_gate_stage(
    records: List[InstructionRecord],
    rules: RuleConfig,
    out_dir: Path,
    seed: int,
) -> Tuple[List[InstructionRecord], StageManifest]:
    """Gate every record's response; analyzers run once per language batch."""
    all_blocks = []
    spans: List[Tuple[int, int]] = []
    for record in records:
        blocks = extract_blocks(record.response or "")
        spans.append((len(all_blocks), len(all_blocks) + len(blocks)))
        all_blocks.extend(blocks)
    reports = analyze_blocks(all_blocks, rules) if all_blocks else []

    kept: List[InstructionRecord] = []
    rejects: List[dict] = []
    failures_by_language: Dict[str, int] = {}
    no_code = 0
    for record, (start, end) in zip(records, spans):
        verdict = verdict_from_reports(reports[start:end], had_blocks=end > start)
        record.gate = verdict.to_dict()
        if verdict.no_code:
            no_code += 1
        if verdict.status == "pass":
            kept.append(record)
        else:
            for report in verdict.reports:
                if report.status == "fail":
                    for issue in report.issues:
                        if issue.severity.value == "error":
                            failures_by_language[issue.language] = (
                                failures_by_language.get(issue.language, 0) + 1
                            )
                            break
                    break
            rejects.append(
                dict(
                    reject_entry("gate", "error-severity lint finding", record.id,
                                 excerpt=(record.response or "")[:300]),
                    gate=record.gate,
                )
            )

    out_path = out_dir / "gate.jsonl"
    rejects_path = out_dir / "gate.rejects.jsonl"
    write_records(out_path, kept)
    write_jsonl(rejects_path, rejects)
    manifest = StageManifest(
        stage="gate",
        input_path="respond.jsonl",
        output_path=out_path.name,
        rejects_path=rejects_path.name,
        rng_seed=seed,
        counts={"in": len(records), "out": len(kept), "rejected": len(rejects)},
        params_digest=stage_digest("gate", seed=seed),
        extra={"no_code": no_code, "failures_by_language": failures_by_language},
    )
    manifest.check()
    (out_dir / "gate.manifest.json").write_text(
        json.dumps(manifest.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return kept, manifest


def report(
    manifests: List[StageManifest], records: List[InstructionRecord]
) -> dict:
    """Run summary: stage counts, gate failures, score distributions."""
    summary: dict = {"stages": [], "records": len(records)}
    for manifest in manifests:
        manifest.check()
        entry = {"stage": manifest.stage, "counts": manifest.counts}
        if manifest.extra:
            entry["extra"] = manifest.extra
        summary["stages"].append(entry)

    histogram: Dict[str, int] = {}
    complexity_by_flow: Dict[str, List[int]] = {}
    for record in records:
        if record.scorecard is None:
            continue
        bucket = f"{record.scorecard.final_score:.2f}"
        histogram[bucket] = histogram.get(bucket, 0) + 1
        if record.scorecard.complexity is not None:
            complexity_by_flow.setdefault(record.flow, []).append(
                record.scorecard.complexity
            )
    if histogram:
        summary["quality_score_histogram"] = dict(sorted(histogram.items()))
    if complexity_by_flow:
        summary["complexity_stats"] = {
            flow: distribution_stats(scores).to_dict()
            for flow, scores in sorted(complexity_by_flow.items())
        }
    return summary


def extract_snippet_stage(
    corpus_path: str | Path, out_dir: Path, cfg: PipelineConfig
) -> Tuple[List[CodeSnippet], StageManifest]:
    loaded = load_corpus(corpus_path)
    snippets: List[CodeSnippet] = []
    rejects = [dict(r, stage="snippets") for r in loaded.rejects]
    for doc in loaded.documents:
        try:
            snippets.extend(
                sample_snippets(
                    doc, cfg.snippets_per_doc,
                    rng_seed=derive_seed(cfg.seed, "snippets", doc.source_id),
                )
            )
        except DocumentTooShort as exc:
            rejects.append(reject_entry("snippets", str(exc), doc.source_id))
    snippets = dedup_snippets(snippets)
    out_path = out_dir / "snippets.jsonl"
    write_jsonl(out_path, (s.to_dict() for s in snippets))
    write_jsonl(out_dir / "snippets.rejects.jsonl", rejects)
    manifest = StageManifest(
        stage="snippets",
        input_path=Path(corpus_path).name,
        output_path="snippets.jsonl",
        rejects_path="snippets.rejects.jsonl",
        rng_seed=cfg.seed,
        counts={
            "in": len(loaded.documents) + len(loaded.rejects),
            "out": len(loaded.documents) + len(loaded.rejects) - len(rejects),
            "rejected": len(rejects),
        },
        params_digest=stage_digest(
            "snippets", seed=cfg.seed, per_doc=cfg.snippets_per_doc
        ),
        extra={"snippets": len(snippets)},
    )
    manifest.check()
    (out_dir / "snippets.manifest.json").write_text(
        json.dumps(manifest.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return snippets, manifest


def run_all(
    corpus_path: str | Path,
    out_dir: str | Path,
    cfg: PipelineConfig,
    gateway: Optional[Gateway] = None,
    vocab_files: Optional[Dict[str, str]] = None,
) -> dict:
    """Full pipeline over one corpus; returns the run summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if gateway is None:
        cassette = Cassette(cfg.cassette) if cfg.cassette else None
        gateway = Gateway(cassette=cassette)

    manifests: List[StageManifest] = []

    snippets, manifest = extract_snippet_stage(corpus_path, out_dir, cfg)
    manifests.append(manifest)

    reverse_records, stage_manifests = run_reverse_flow(snippets, out_dir, cfg, gateway)
    manifests.extend(stage_manifests)

    backfeed_records, stage_manifests = run_backfeed_flow(
        reverse_records, out_dir, cfg, gateway, vocab_files=vocab_files
    )
    manifests.extend(stage_manifests)

    combined = reverse_records + backfeed_records

    dicts, manifest = run_complexity_stage(combined, out_dir, cfg, gateway)
    manifests.append(manifest)
    combined = [InstructionRecord.from_dict(d) for d in dicts]

    dicts, manifest = run_response_stage(combined, out_dir, cfg, gateway)
    manifests.append(manifest)
    combined = [InstructionRecord.from_dict(d) for d in dicts]

    rules = load_rule_config(cfg.rules) if cfg.rules else RuleConfig()
    kept, manifest = run_gate_stage(combined, rules, out_dir, cfg.seed)
    manifests.append(manifest)

    final_path = out_dir / "dataset.jsonl"
    write_jsonl(
        final_path,
        (
            {
                "prompt": r.prompt,
                "response": r.response,
                "metadata": {
                    "id": r.id,
                    "flow": r.flow,
                    "problem_type": r.problem_type,
                    "language": r.language,
                    "quality_score": r.scorecard.final_score if r.scorecard else None,
                    "complexity": r.scorecard.complexity if r.scorecard else None,
                },
            }
            for r in kept
        ),
    )

    summary = report(manifests, kept)
    (out_dir / "summary.json").write_text(
        json.dumps(summary, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    logger.info("run complete: %d final records at %s", len(kept), final_path)
    return summary
