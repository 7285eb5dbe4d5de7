#!/usr/bin/env python3
"""Build the shipped demo: corpus, config, vocab files, and cassette.

The cassette is recorded against a deterministic local stub that emits
parseable output for every template kind, so the demo replays byte-for-
byte without network access and without static analyzers (responses are
prose-only, which the gate passes with a no-code marker).
"""

import hashlib
import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from instructpipe.config import PipelineConfig  # noqa: E402
from instructpipe.gateway import Cassette, CompletionRequest, Gateway  # noqa: E402
from instructpipe.pipeline import run_all  # noqa: E402

DEMO = REPO / "demo"

_BRACKETED = re.compile(r"\[([^\[\]]+)\]")
_NODE = re.compile(r"""Node\(id="(?P<id>[^"]+)", type="(?P<type>[^"]+)"\)""")

_LANGS = ("Python", "JavaScript", "Java", "C++", "SQL")
_TASK_POOL = (
    "Data Processing", "String Validation", "Report Generation",
    "Inventory Management", "Log Analysis", "Schedule Planning",
)
_INSTR_POOL = (
    "parse input records", "aggregate totals", "validate user input",
    "sort by priority", "cache lookups", "format output tables",
)
_KNOW_POOL = (
    "Hash Table", "Regular Expression", "Recursion",
    "File IO", "Sorting Algorithm", "Exception Handling",
)


def _h(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _pick(pool, digest, offset, count):
    out = []
    for i in range(count):
        out.append(pool[int(digest[offset + i * 2: offset + i * 2 + 2], 16) % len(pool)])
    return sorted(set(out))


def _tail_after(prompt: str, marker: str) -> str:
    idx = prompt.rfind(marker)
    return prompt[idx + len(marker):] if idx >= 0 else prompt


def stub_transport(req: CompletionRequest) -> str:
    p = req.prompt
    h = _h(p)
    r = int(h[:2], 16)

    if "# Input Random Code Snippet" in p:
        lang = _LANGS[r % len(_LANGS)]
        return (
            "1. Code Snippet Feature Analysis: The snippet handles structured data.\n"
            "2. Inspiration Brainstorming: Real-world batch processing scenarios.\n"
            "3. Initial Problem Design: drafted.\n"
            "4. Problem Review and Optimization: reviewed.\n"
            "5. Problem Improvement and Revision: revised.\n"
            "6. Formal Problem Output:\n"
            f"[Programming Language]: {lang}\n"
            f"[Problem Description]: Build a utility that processes a stream of "
            f"records, applies validation rules, and reports aggregate results. "
            f"Variant {h[:8]} requires handling malformed entries gracefully."
        )

    if "# Complexity Methods (randomly select one)" in p:
        given = _tail_after(p, "# Given Prompt\n").strip()
        given = given.split("# Required Complexity Method")[0].strip()
        return (
            "1. Understanding Given Prompt: analyzed.\n"
            "2. Code Identification and Extraction: no code present.\n"
            "3. Selected Method: as directed.\n"
            "4. Selection Rationale: fits the task.\n"
            "5. Complexity Results:\n"
            f"   - Prompt Section: Under a strict memory budget and with input "
            f"sizes up to one million entries, {given}\n"
            "   - Code Section: None\n"
            "   - Completeness Verification: no code blocks to integrate."
        )

    if "You are a text rewriting expert" in p:
        original = _tail_after(p, "# Original Question\n").strip()
        return (
            "1. Paragraph Structure Analysis: done.\n"
            "2. Logical Flow Analysis: done.\n"
            "3. Paragraph Structure Brainstorming: three options.\n"
            "4. Sentence Structure Brainstorming: three options.\n"
            "5. Selected Approach: purpose-first restructuring.\n"
            f"6. Rewritten Question: Your goal in this exercise is the following. {original}"
        )

    if "extract the [Task] keywords" in p:
        kws = _pick(_TASK_POOL, h, 2, 1)
        return "Analysis complete.\n[Task]:" + "".join(f"[{k}]" for k in kws)

    if "[Instructions]:[keyword1]" in p:
        kws = _pick(_INSTR_POOL, h, 4, 2)
        return "Analysis complete.\n[Instructions]:" + "".join(f"[{k}]" for k in kws)

    if "[Knowledge Points]:[keyword1]" in p:
        kws = _pick(_KNOW_POOL, h, 8, 2)
        return "Analysis complete.\n[Knowledge Points]:" + "".join(f"[{k}]" for k in kws)

    if "structure it into `Node` objects" in p:
        keywords = _BRACKETED.findall(_tail_after(p, "**Input**:\n"))
        lines = []
        for i, kw in enumerate(keywords):
            if i == 0:
                kind = "task"
            elif i % 2 == 1:
                kind = "knowledge point"
            else:
                kind = "instruction"
            lines.append(f'Node(id="{kw}", type="{kind}")')
        return "\n".join(lines)

    if "Build relationship object triples" in p:
        nodes = [(m.group("id"), m.group("type"))
                 for m in _NODE.finditer(_tail_after(p, "# Error Handling"))]
        tasks = [n for n, t in nodes if t == "task"]
        instrs = [n for n, t in nodes if t == "instruction"]
        knows = [n for n, t in nodes if t == "knowledge point"]
        if not tasks:
            return "Unable to determine relationship"
        task = tasks[0]
        lines = [f"{task} requires {i}" for i in instrs]
        lines += [f"{task} contains {k}" for k in knows]
        if instrs and knows:
            lines.append(f"{instrs[0]} displays {knows[0]}")
        lines += [f"{task} unrelated {t}" for t in tasks[1:]]
        return "\n".join(lines)

    if "analyze it according to the following 7 criteria" in p:
        if r % 7 == 0:
            met = [1, 2, 4, 6, 7]
        elif r % 2 == 0:
            met = [1, 2, 3, 4, 6, 7]
        else:
            met = [1, 2, 3, 4, 5, 6, 7]
        return (
            "Evaluation Process: each criterion was weighed against the prompt.\n"
            f"Standards Met: {met}"
        )

    if "assign a difficulty score ranging from 1 (easiest) to 10" in p:
        score = 3 + (int(h[2:4], 16) % 6)
        return (
            "Thinking Steps: understood the question.\n"
            "Analysis: moderate scope, some domain knowledge.\n"
            "Json Output:\n"
            f'{{"score": {score}}}'
        )

    if "# Input Keywords" in p:
        keywords = _BRACKETED.findall(_tail_after(p, "# Input Keywords\n"))
        topic = ", ".join(keywords[:4]) if keywords else "the given concepts"
        return (
            "1. Consider logical relationships between keywords: related concepts.\n"
            "2. Understand question characteristics: noted.\n"
            "3. Consider how to organize keywords into questions: combined.\n"
            "4. Output initial question: drafted.\n"
            "5. Review initial question: tightened wording.\n"
            "6. Propose new question: improved.\n"
            "7. Repeat above steps, review and modify again until question meets requirements\n"
            f"8. Final question output: Design and describe a program that brings "
            f"together {topic} to solve a realistic workflow problem, explaining "
            f"the trade-offs of your approach. Variant {h[:8]}."
        )

    # Plain question -> response stage. Prose only, so the demo gate passes
    # every record with a no-code marker and needs no analyzers.
    return (
        "A sound approach starts by clarifying the input contract, then walking "
        "through validation, transformation, and reporting as separate concerns. "
        "Each concern should be testable in isolation, and failure cases should "
        f"surface early with actionable messages. Reference {h[:8]}."
    )


def build_corpus(path: Path) -> None:
    langs = ["python", "javascript", "java", "c_cpp", "sql"]
    docs = []
    for d in range(10):
        lines = []
        for i in range(30):
            lines.append(f"value_{d}_{i} = transform(step_{d}, input_{i}) + {d * 31 + i}")
        docs.append({
            "source_id": f"demo-doc-{d:02d}",
            "language": langs[d % len(langs)],
            "text": "\n".join(lines),
        })
    with path.open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")


def main() -> None:
    DEMO.mkdir(exist_ok=True)
    build_corpus(DEMO / "corpus.jsonl")

    (DEMO / "config.yaml").write_text(
        "mode: replay\n"
        "cassette: demo/cassette.jsonl\n"
        "seed: 42\n"
        "jobs: 2\n"
        "snippets_per_doc: 2\n"
        "combo_count: 6\n"
        "combo_min: 4\n"
        "combo_max: 6\n",
        encoding="utf-8",
    )
    (DEMO / "vocab_task.txt").write_text(
        "Image Processing\nNetwork Monitoring\n", encoding="utf-8"
    )
    (DEMO / "vocab_instruction.txt").write_text(
        "compress payloads\nretry failed requests\n", encoding="utf-8"
    )
    (DEMO / "vocab_knowledge.txt").write_text(
        "Binary Search\nGraph Traversal\n", encoding="utf-8"
    )
    (DEMO / "rules.yaml").write_text(
        "eslint:\n"
        "  disabled: [quotes]\n"
        "pylint:\n"
        "  disabled: []\n",
        encoding="utf-8",
    )

    cassette_path = DEMO / "cassette.jsonl"
    if cassette_path.exists():
        cassette_path.unlink()
    cfg = PipelineConfig(
        mode="record",
        cassette=str(cassette_path),
        seed=42,
        jobs=2,
        snippets_per_doc=2,
        combo_count=6,
        combo_min=4,
        combo_max=6,
    )
    gateway = Gateway(cassette=Cassette(cassette_path), transport=stub_transport)
    workdir = Path(tempfile.mkdtemp(prefix="demo-record-"))
    try:
        summary = run_all(DEMO / "corpus.jsonl", workdir, cfg, gateway=gateway)
    finally:
        shutil.rmtree(workdir, ignore_errors=True)
    print(json.dumps(summary, indent=2, sort_keys=True))
    print(f"cassette entries: {len(Cassette(cassette_path))}")


if __name__ == "__main__":
    main()
