"""Command-line entry points for each pipeline stage and the full run."""

import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click

from .config import PipelineConfig, load_config
from .corpus import CodeSnippet
from .gate import RuleConfig, load_rule_config
from .gateway import Cassette, Gateway
from .kg import NodeKind
from .pipeline import (
    InstructionRecord,
    read_jsonl,
    read_records,
    run_all,
    run_backfeed_flow,
    run_complexity_stage,
    run_gate_stage,
    run_response_stage,
    run_reverse_flow,
    write_jsonl,
)
from .pipeline.backfeed import draw_combinations, kg_stage_fn, merge_vocabulary
from .pipeline.finalize import extract_snippet_stage, report
from .pipeline.records import StageManifest

logger = logging.getLogger(__name__)


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="YAML config file.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Run seed.")(fn)
    fn = click.option("--mode", type=click.Choice(["live", "record", "replay"]),
                      default=None, help="Completion mode.")(fn)
    fn = click.option("--cassette", type=click.Path(), default=None,
                      help="Cassette file for record/replay.")(fn)
    fn = click.option("--jobs", type=int, default=None, help="Worker pool size.")(fn)
    return fn


def _load_cfg(config_path, **overrides) -> PipelineConfig:
    return load_config(config_path, overrides=overrides)


def _gateway(cfg: PipelineConfig) -> Gateway:
    cassette = Cassette(cfg.cassette) if cfg.cassette else None
    return Gateway(cassette=cassette)


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool):
    """Synthesize code-instruction QA datasets from code corpora."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command("extract-snippets")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", required=True, type=click.Path())
@_common_options
def extract_snippets(in_path, out, config_path, seed, mode, cassette, jobs):
    """Sample contiguous line-window snippets from a corpus file."""
    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    snippets, manifest = extract_snippet_stage(in_path, _out_dir(out), cfg)
    click.echo(f"{len(snippets)} snippets ({manifest.counts['rejected']} documents rejected)")


@main.command("gen-reverse")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="Snippet file from extract-snippets.")
@click.option("--out", "out", required=True, type=click.Path())
@_common_options
def gen_reverse(in_path, out, config_path, seed, mode, cassette, jobs):
    """Run the reverse flow: snippet -> problem -> complicate -> rewrite -> filter."""
    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    snippets = [CodeSnippet.from_dict(d) for d in read_jsonl(in_path)]
    records, manifests = run_reverse_flow(snippets, _out_dir(out), cfg, _gateway(cfg))
    click.echo(f"{len(records)} reverse questions through {len(manifests)} stages")


@main.command("extract-keywords")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="Question records to extract keywords from.")
@click.option("--out", "out", required=True, type=click.Path())
@_common_options
def extract_keywords(in_path, out, config_path, seed, mode, cassette, jobs):
    """Extract task/instruction/knowledge keywords from question records."""
    from .pipeline.backfeed import extract_stage_fn
    from .pipeline.stages import run_stage, stage_digest

    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    records = read_records(in_path)
    extractions, manifest = run_stage(
        "backfeed_extract", records, extract_stage_fn(cfg, _gateway(cfg)),
        _out_dir(out), input_path=Path(in_path).name, rng_seed=cfg.seed,
        params_digest=stage_digest(
            "backfeed_extract", seed=cfg.seed, mode=cfg.mode, model=cfg.model,
            temperature=cfg.temperature, max_tokens=cfg.max_tokens,
        ),
        jobs=cfg.jobs, to_dict=lambda d: d,
    )
    click.echo(f"keywords for {len(extractions)} records "
               f"({manifest.counts['rejected']} rejected)")


@main.command("build-kg")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="Keyword extraction file from extract-keywords.")
@click.option("--out", "out", required=True, type=click.Path())
@click.option("--vocab-task", type=click.Path(exists=True), default=None)
@click.option("--vocab-instruction", type=click.Path(exists=True), default=None)
@click.option("--vocab-knowledge", type=click.Path(exists=True), default=None)
@_common_options
def build_kg(in_path, out, vocab_task, vocab_instruction, vocab_knowledge,
             config_path, seed, mode, cassette, jobs):
    """Build keyword groups: combinations -> node/relation prompts -> components."""
    from .pipeline.stages import run_stage, stage_digest

    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    vocab_files = {}
    if vocab_task:
        vocab_files[NodeKind.TASK.value] = vocab_task
    if vocab_instruction:
        vocab_files[NodeKind.INSTRUCTION.value] = vocab_instruction
    if vocab_knowledge:
        vocab_files[NodeKind.KNOWLEDGE_POINT.value] = vocab_knowledge
    extractions = read_jsonl(in_path)
    vocab = merge_vocabulary(extractions, vocab_files)
    combos = draw_combinations(vocab, cfg)
    groups, manifest = run_stage(
        "backfeed_kg", combos, kg_stage_fn(cfg, _gateway(cfg)),
        _out_dir(out), input_path=Path(in_path).name, rng_seed=cfg.seed,
        params_digest=stage_digest(
            "backfeed_kg", seed=cfg.seed, mode=cfg.mode, model=cfg.model,
            combo_min=cfg.combo_min, combo_max=cfg.combo_max,
            combo_count=cfg.combo_count,
        ),
        jobs=cfg.jobs, item_id=lambda c: c["id"], to_dict=lambda d: d,
        extra={"vocabulary_size": len(vocab.words())},
    )
    click.echo(f"{len(groups)} keyword groups from {len(combos)} combinations")


@main.command("gen-backfeed")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="Reverse question records (keyword source).")
@click.option("--out", "out", required=True, type=click.Path())
@click.option("--vocab-task", type=click.Path(exists=True), default=None)
@click.option("--vocab-instruction", type=click.Path(exists=True), default=None)
@click.option("--vocab-knowledge", type=click.Path(exists=True), default=None)
@_common_options
def gen_backfeed(in_path, out, vocab_task, vocab_instruction, vocab_knowledge,
                 config_path, seed, mode, cassette, jobs):
    """Run the backfeed flow end to end from reverse question records."""
    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    vocab_files = {}
    if vocab_task:
        vocab_files[NodeKind.TASK.value] = vocab_task
    if vocab_instruction:
        vocab_files[NodeKind.INSTRUCTION.value] = vocab_instruction
    if vocab_knowledge:
        vocab_files[NodeKind.KNOWLEDGE_POINT.value] = vocab_knowledge
    records = read_records(in_path)
    out_records, manifests = run_backfeed_flow(
        records, _out_dir(out), cfg, _gateway(cfg), vocab_files=vocab_files
    )
    click.echo(f"{len(out_records)} backfeed questions through {len(manifests)} stages")


@main.command("score")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", required=True, type=click.Path())
@_common_options
def score(in_path, out, config_path, seed, mode, cassette, jobs):
    """Seven-criteria quality scoring and threshold filtering."""
    from .pipeline.reverse import quality_stage_fn
    from .pipeline.stages import run_stage, stage_digest

    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    records = read_records(in_path)
    kept, manifest = run_stage(
        "quality", records, quality_stage_fn(cfg, _gateway(cfg), "quality"),
        _out_dir(out), input_path=Path(in_path).name, rng_seed=cfg.seed,
        params_digest=stage_digest(
            "quality", seed=cfg.seed, mode=cfg.mode,
            threshold=cfg.score_threshold,
            judge_model=cfg.effective_judge_model,
        ),
        jobs=cfg.jobs,
    )
    click.echo(f"kept {len(kept)} of {manifest.counts['in']}")


@main.command("complexity")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", required=True, type=click.Path())
@_common_options
def complexity(in_path, out, config_path, seed, mode, cassette, jobs):
    """Rate prompt difficulty 1-10 for scored records."""
    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    records = read_records(in_path)
    rated, manifest = run_complexity_stage(records, _out_dir(out), cfg, _gateway(cfg))
    click.echo(f"rated {len(rated)} of {manifest.counts['in']}")


@main.command("respond")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", required=True, type=click.Path())
@_common_options
def respond(in_path, out, config_path, seed, mode, cassette, jobs):
    """Generate one response per prompt record."""
    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    records = read_records(in_path)
    answered, manifest = run_response_stage(records, _out_dir(out), cfg, _gateway(cfg))
    click.echo(f"responded {len(answered)} of {manifest.counts['in']}")


@main.command("gate")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out", required=True, type=click.Path())
@click.option("--rejects", "rejects", type=click.Path(), default=None,
              help="Defaults to gate.rejects.jsonl in the output directory.")
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@_common_options
def gate(in_path, out, rejects, rules_path, config_path, seed, mode, cassette, jobs):
    """Static-analysis gate over response code blocks."""
    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    rules = load_rule_config(rules_path or cfg.rules) if (rules_path or cfg.rules) else RuleConfig()
    records = read_records(in_path)
    out_dir = _out_dir(out)
    kept, manifest = run_gate_stage(records, rules, out_dir, cfg.seed)
    if rejects:
        default = out_dir / "gate.rejects.jsonl"
        Path(rejects).parent.mkdir(parents=True, exist_ok=True)
        Path(rejects).write_text(default.read_text(encoding="utf-8"), encoding="utf-8")
    click.echo(
        f"pass {manifest.counts['out']} / fail {manifest.counts['rejected']} "
        f"(no-code {manifest.extra.get('no_code', 0)})"
    )


@main.command("stats")
@click.option("--run-dir", "run_dir", required=True, type=click.Path(exists=True),
              help="Directory holding stage manifests and the final dataset.")
def stats(run_dir):
    """Summarize a run directory from its manifests and final records."""
    run_path = Path(run_dir)
    manifests = [
        StageManifest.from_dict(json.loads(p.read_text(encoding="utf-8")))
        for p in sorted(run_path.glob("*.manifest.json"))
    ]
    gate_file = run_path / "gate.jsonl"
    records = read_records(gate_file) if gate_file.exists() else []
    click.echo(json.dumps(report(manifests, records), indent=2, sort_keys=True))


@main.command("run-all")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="Corpus file of documents.")
@click.option("--out", "out", required=True, type=click.Path())
@click.option("--vocab-task", type=click.Path(exists=True), default=None)
@click.option("--vocab-instruction", type=click.Path(exists=True), default=None)
@click.option("--vocab-knowledge", type=click.Path(exists=True), default=None)
@_common_options
def run_all_cmd(in_path, out, vocab_task, vocab_instruction, vocab_knowledge,
                config_path, seed, mode, cassette, jobs):
    """Full pipeline: snippets, both flows, scoring, responses, gate, report."""
    cfg = _load_cfg(config_path, seed=seed, mode=mode, cassette=cassette, jobs=jobs)
    vocab_files = {}
    if vocab_task:
        vocab_files[NodeKind.TASK.value] = vocab_task
    if vocab_instruction:
        vocab_files[NodeKind.INSTRUCTION.value] = vocab_instruction
    if vocab_knowledge:
        vocab_files[NodeKind.KNOWLEDGE_POINT.value] = vocab_knowledge
    summary = run_all(in_path, out, cfg, vocab_files=vocab_files)
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    sys.exit(main())
