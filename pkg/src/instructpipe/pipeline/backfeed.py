"""Backfeed flow: keywords -> graph -> groups -> questions -> filter.

Keyword vocabularies come from two sources: per-dimension extraction over
the reverse-flow questions, and optional seed vocabulary files. Random
keyword combinations are proposed to the model for node typing and
relation extraction; groups are then assembled locally as connected
components and deduplicated before question generation.
"""

import hashlib
import logging
import random
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .records import InstructionRecord, LineageEntry, StageManifest
from .reverse import complete_text, quality_stage_fn
from .stages import derive_seed, run_stage, stage_digest
from ..config import PipelineConfig
from ..errors import ParseFailure, RecordError
from ..gateway import Gateway
from ..kg import (
    KeywordGroup,
    NodeKind,
    Vocabulary,
    build_groups,
    dedup_groups,
    embed_members,
    parse_nodes,
    parse_triples,
)
from ..prompts import (
    EXTRACT_INSTRUCTION,
    EXTRACT_KNOWLEDGE,
    EXTRACT_TASK,
    KG_NODES,
    KG_RELATIONS,
    KeywordDimension,
    ProblemType,
    backfeed_question,
    parse_backfeed_output,
    parse_keyword_output,
    render,
)

logger = logging.getLogger(__name__)

_DIMENSION_KINDS = {
    KeywordDimension.TASK: (EXTRACT_TASK, NodeKind.TASK),
    KeywordDimension.INSTRUCTION: (EXTRACT_INSTRUCTION, NodeKind.INSTRUCTION),
    KeywordDimension.KNOWLEDGE: (EXTRACT_KNOWLEDGE, NodeKind.KNOWLEDGE_POINT),
}


def _id(*parts) -> str:
    return hashlib.sha1("|".join(str(p) for p in parts).encode("utf-8")).hexdigest()[:16]


def format_keywords(keywords: List[str]) -> str:
    return ", ".join(f"[{k}]" for k in keywords)


def extract_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    def fn(record: InstructionRecord) -> dict:
        out = {"id": record.id, "keywords": {}}
        for dimension, (kind, _) in _DIMENSION_KINDS.items():
            rendered = render(kind, {"problem": record.prompt})
            text = complete_text(gateway, cfg, rendered.text)
            out["keywords"][dimension.value] = parse_keyword_output(text, dimension)
        return out

    return fn


def merge_vocabulary(
    extractions: List[dict], vocab_files: Optional[Dict[str, str]] = None
) -> Vocabulary:
    """Fold extraction outputs and optional seed files into one vocabulary."""
    vocab = Vocabulary()
    for entry in extractions:
        for dimension, (_, node_kind) in _DIMENSION_KINDS.items():
            for keyword in entry["keywords"].get(dimension.value, []):
                vocab.add(keyword, node_kind)
    for kind_name, path in (vocab_files or {}).items():
        vocab.ingest_file(path, NodeKind(kind_name))
    return vocab


def draw_combinations(vocab: Vocabulary, cfg: PipelineConfig) -> List[dict]:
    """Seeded random keyword combinations of configurable arity."""
    words = vocab.words()
    if not words:
        return []
    rng = random.Random(derive_seed(cfg.seed, "backfeed_combos"))
    combos: List[dict] = []
    for i in range(cfg.combo_count):
        size = rng.randint(cfg.combo_min, min(cfg.combo_max, len(words)))
        picked = rng.sample(words, size)
        combos.append({"id": _id("combo", cfg.seed, i, *picked), "keywords": picked})
    return combos


def kg_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    def fn(combo: dict) -> List[dict]:
        nodes_rendered = render(KG_NODES, {"keywords": format_keywords(combo["keywords"])})
        node_text = complete_text(gateway, cfg, nodes_rendered.text)
        nodes, failures = parse_nodes(node_text)
        if not nodes:
            raise ParseFailure("no nodes parsed", node_text[-200:])
        if failures:
            logger.debug("combo %s: %d malformed node lines", combo["id"], len(failures))
        node_lines = "\n".join(
            f'Node(id="{n.id}", type="{n.kind.value}")' for n in nodes
        )
        rel_rendered = render(KG_RELATIONS, {"nodes": node_lines})
        rel_text = complete_text(gateway, cfg, rel_rendered.text)
        # model relation words are sloppy; canonicalize by node kinds
        triples = parse_triples(rel_text, nodes, strict=False)
        groups = build_groups(triples)
        return [
            dict(
                g.to_dict(),
                id=_id("group", *g.members),
                combo_id=combo["id"],
                params_digest=rel_rendered.params_digest,
            )
            for g in groups
        ]

    return fn


def _group_from_dict(d: dict) -> KeywordGroup:
    return KeywordGroup(
        members=list(d["members"]),
        embedding=embed_members(d["members"]),
        lineage=list(d.get("lineage", [])),
    )


def question_stage_fn(cfg: PipelineConfig, gateway: Gateway):
    types = list(ProblemType)

    def fn(group: dict) -> InstructionRecord:
        rng = random.Random(derive_seed(cfg.seed, "backfeed_question", group["id"]))
        ptype = rng.choice(types)
        rendered = render(
            backfeed_question(ptype), {"keywords": format_keywords(group["members"])}
        )
        text = complete_text(gateway, cfg, rendered.text)
        prompt = parse_backfeed_output(text)
        return InstructionRecord(
            id=_id("backfeed", group["id"], ptype.value),
            flow="backfeed",
            problem_type=ptype.value,
            language="other",
            prompt=prompt,
            lineage=[
                LineageEntry("backfeed_question", (group["id"],), rendered.params_digest)
            ],
        )

    return fn


def run_backfeed_flow(
    reverse_records: List[InstructionRecord],
    out_dir: Path,
    cfg: PipelineConfig,
    gateway: Gateway,
    vocab_files: Optional[Dict[str, str]] = None,
) -> Tuple[List[InstructionRecord], List[StageManifest]]:
    manifests: List[StageManifest] = []
    common = {
        "seed": cfg.seed, "mode": cfg.mode, "model": cfg.model,
        "temperature": cfg.temperature, "max_tokens": cfg.max_tokens,
    }

    extractions, manifest = run_stage(
        "backfeed_extract", reverse_records, extract_stage_fn(cfg, gateway),
        out_dir, input_path="reverse_quality.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest("backfeed_extract", **common),
        jobs=cfg.jobs,
        to_dict=lambda d: d,
    )
    manifests.append(manifest)

    vocab = merge_vocabulary(extractions, vocab_files)
    combos = draw_combinations(vocab, cfg)

    group_dicts, manifest = run_stage(
        "backfeed_kg", combos, kg_stage_fn(cfg, gateway),
        out_dir, input_path="backfeed_extract.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest(
            "backfeed_kg", combo_min=cfg.combo_min, combo_max=cfg.combo_max,
            combo_count=cfg.combo_count, **common,
        ),
        jobs=cfg.jobs,
        item_id=lambda combo: combo["id"],
        to_dict=lambda d: d,
        extra={"vocabulary_size": len(vocab.words())},
    )
    manifests.append(manifest)

    groups = [_group_from_dict(d) for d in group_dicts]
    kept_groups = dedup_groups(groups, threshold=cfg.dedup_threshold)
    kept_ids = {_id("group", *g.members) for g in kept_groups}
    kept_dicts = [d for d in group_dicts if d["id"] in kept_ids]
    _, manifest = run_stage(
        "backfeed_dedup", group_dicts,
        lambda d: d if d["id"] in kept_ids else _raise_duplicate(d),
        out_dir, input_path="backfeed_kg.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest(
            "backfeed_dedup", threshold=cfg.dedup_threshold, seed=cfg.seed,
            inputs=[d["id"] for d in group_dicts],
        ),
        item_id=lambda d: d["id"],
        to_dict=lambda d: d,
    )
    manifests.append(manifest)

    records, manifest = run_stage(
        "backfeed_question", kept_dicts, question_stage_fn(cfg, gateway),
        out_dir, input_path="backfeed_dedup.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest("backfeed_question", **common),
        jobs=cfg.jobs,
        item_id=lambda d: d["id"],
    )
    manifests.append(manifest)
    out = [InstructionRecord.from_dict(d) for d in records]

    dicts, manifest = run_stage(
        "backfeed_quality", out, quality_stage_fn(cfg, gateway, "backfeed_quality"),
        out_dir, input_path="backfeed_question.jsonl", rng_seed=cfg.seed,
        params_digest=stage_digest(
            "backfeed_quality", threshold=cfg.score_threshold,
            judge_model=cfg.effective_judge_model,
            judge_temperature=cfg.judge_temperature, **common,
        ),
        jobs=cfg.jobs,
    )
    manifests.append(manifest)
    return [InstructionRecord.from_dict(d) for d in dicts], manifests


class DuplicateGroup(RecordError):
    """Dedup rejection: too similar to an earlier kept group."""


def _raise_duplicate(d: dict):
    raise DuplicateGroup(f"near-duplicate of a kept group: {d['members']}")
