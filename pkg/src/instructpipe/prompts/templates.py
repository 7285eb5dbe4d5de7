"""Prompt template rendering.

Templates are shipped verbatim as plain-text resources with bracketed
ALL-CAPS placeholder slots ([CODE_SNIPPET], [PROBLEM_TYPE], ...). Each
template kind declares exactly which placeholders it accepts, so literal
bracketed text inside the templates (examples, output formats) is never
mistaken for a slot. Rendering is pure substitution; same inputs always
produce identical text.
"""

import hashlib
import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Dict, List, Mapping, Optional

from ..errors import MissingPlaceholder, UnknownKind


class ProblemType(str, Enum):
    CODE_GENERATION = "CodeGeneration"
    CODE_UNDERSTANDING = "CodeUnderstanding"
    KNOWLEDGE_QUESTION = "KnowledgeQuestion"
    CODE_COMPLETION = "CodeCompletion"
    CODE_OPTIMIZATION = "CodeOptimization"
    DEBUG = "Debug"
    MODIFY_CODE = "ModifyCode"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def block_stem(self) -> str:
        return _BLOCK_STEMS[self]


_DISPLAY_NAMES = {
    ProblemType.CODE_GENERATION: "Code Generation",
    ProblemType.CODE_UNDERSTANDING: "Code Understanding",
    ProblemType.KNOWLEDGE_QUESTION: "Knowledge-based Question",
    ProblemType.CODE_COMPLETION: "Code Completion",
    ProblemType.CODE_OPTIMIZATION: "Code Optimization",
    ProblemType.DEBUG: "Debug",
    ProblemType.MODIFY_CODE: "Modify Code as required",
}

_BLOCK_STEMS = {
    ProblemType.CODE_GENERATION: "code_generation",
    ProblemType.CODE_UNDERSTANDING: "code_understanding",
    ProblemType.KNOWLEDGE_QUESTION: "knowledge_question",
    ProblemType.CODE_COMPLETION: "code_completion",
    ProblemType.CODE_OPTIMIZATION: "code_optimization",
    ProblemType.DEBUG: "debug",
    ProblemType.MODIFY_CODE: "modify_code",
}

# The six complication directions, in template order.
COMPLICATE_METHODS = (
    "Constraint Addition",
    "Depth Extension",
    "Concrete Specification",
    "Reasoning Refinement",
    "Input Enhancement",
    "Innovation Variation",
)


@dataclass(frozen=True)
class TemplateKind:
    name: str
    problem_type: Optional[ProblemType] = None

    def __str__(self) -> str:
        if self.problem_type is not None:
            return f"{self.name}({self.problem_type.value})"
        return self.name


def reverse_question(problem_type: ProblemType) -> TemplateKind:
    return TemplateKind("reverse_question", problem_type)


def backfeed_question(problem_type: ProblemType) -> TemplateKind:
    return TemplateKind("backfeed_question", problem_type)


COMPLICATE = TemplateKind("complicate")
TEXT_REWRITE = TemplateKind("text_rewrite")
EXTRACT_TASK = TemplateKind("extract_task")
EXTRACT_INSTRUCTION = TemplateKind("extract_instruction")
EXTRACT_KNOWLEDGE = TemplateKind("extract_knowledge")
KG_NODES = TemplateKind("kg_nodes")
KG_RELATIONS = TemplateKind("kg_relations")
KG_PHRASES = TemplateKind("kg_phrases")
QUALITY_FILTER = TemplateKind("quality_filter")
COMPLEXITY_ASSESS = TemplateKind("complexity_assess")

# kind name -> (required user params, optional user params with defaults)
_KIND_PARAMS: Dict[str, tuple] = {
    "reverse_question": (("code_snippet",), {}),
    "complicate": (("prompt",), {"method_directive": ""}),
    "text_rewrite": (("question",), {}),
    "extract_task": (("problem",), {}),
    "extract_instruction": (("problem",), {}),
    "extract_knowledge": (("problem",), {}),
    "kg_nodes": (("keywords",), {}),
    "kg_relations": (("nodes",), {}),
    "kg_phrases": (("triples",), {}),
    "backfeed_question": (("keywords",), {}),
    "quality_filter": (("prompt",), {}),
    "complexity_assess": (("question",), {}),
}

_TYPED_KINDS = ("reverse_question", "backfeed_question")


def all_kinds() -> List[TemplateKind]:
    """Every renderable kind: 7 reverse + 7 backfeed + the untyped ones."""
    kinds: List[TemplateKind] = []
    for pt in ProblemType:
        kinds.append(reverse_question(pt))
    for pt in ProblemType:
        kinds.append(backfeed_question(pt))
    for name in _KIND_PARAMS:
        if name not in _TYPED_KINDS:
            kinds.append(TemplateKind(name))
    return kinds


@dataclass(frozen=True)
class RenderedPrompt:
    kind: TemplateKind
    text: str
    params_digest: str


@lru_cache(maxsize=None)
def _resource_text(filename: str) -> str:
    return resources.files(__package__).joinpath("resources", filename).read_text(encoding="utf-8")


_SECTION_RE = re.compile(
    r"^## (characteristics|brainstorm|review_points|notes|purpose|standards)\s*$",
    re.MULTILINE,
)


@lru_cache(maxsize=None)
def _type_blocks(stem: str) -> Dict[str, str]:
    """Parse one per-type block file into its named sections."""
    text = _resource_text(f"types/{stem}.md")
    sections: Dict[str, str] = {}
    matches = list(_SECTION_RE.finditer(text))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        sections[m.group(1)] = text[m.start() + len(m.group(0)):end].strip("\n").rstrip()
    return sections


def _substitute(text: str, values: Mapping[str, str]) -> str:
    for token, value in values.items():
        text = text.replace(f"[{token}]", value)
    return text


def render(kind: TemplateKind, params: Mapping[str, str]) -> RenderedPrompt:
    """Render one template kind with the given placeholder parameters."""
    if kind.name not in _KIND_PARAMS:
        raise UnknownKind(kind.name)
    if kind.name in _TYPED_KINDS and kind.problem_type is None:
        raise UnknownKind(f"{kind.name} requires a problem type")

    required, optional = _KIND_PARAMS[kind.name]
    values: Dict[str, str] = {}
    for key in required:
        if key not in params:
            raise MissingPlaceholder(key)
        values[key.upper()] = str(params[key])
    for key, default in optional.items():
        values[key.upper()] = str(params.get(key, default))

    text = _resource_text(f"{kind.name}.md")

    if kind.name == "reverse_question":
        blocks = _type_blocks(kind.problem_type.block_stem)
        values["PROBLEM_TYPE"] = kind.problem_type.display_name
        values["TYPE_CHARACTERISTICS"] = blocks["characteristics"]
        values["TYPE_BRAINSTORM_FOCUS"] = blocks["brainstorm"]
        values["TYPE_REVIEW_POINTS"] = blocks["review_points"]
        values["TYPE_NOTES"] = blocks.get("notes", "")
    elif kind.name == "backfeed_question":
        blocks = _type_blocks(kind.problem_type.block_stem)
        values["QUESTION_TYPE"] = kind.problem_type.display_name
        values["QUESTION_PURPOSE"] = blocks["purpose"]
        values["TYPE_CHARACTERISTICS"] = blocks["characteristics"]
        values["TYPE_STANDARDS"] = blocks.get("standards", "")

    rendered = _substitute(text, values)
    # Empty optional slots leave blank runs behind; tidy without touching content.
    rendered = re.sub(r"\n{3,}", "\n\n", rendered).rstrip() + "\n"

    digest_src = json.dumps(
        {
            "kind": kind.name,
            "problem_type": kind.problem_type.value if kind.problem_type else None,
            "params": {k: str(v) for k, v in sorted(params.items())},
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    digest = hashlib.sha256(digest_src.encode("utf-8")).hexdigest()
    return RenderedPrompt(kind=kind, text=rendered, params_digest=digest)


def placeholder_tokens() -> List[str]:
    """Every placeholder token any template declares; used by integrity checks."""
    tokens = {
        "PROBLEM_TYPE", "QUESTION_TYPE", "QUESTION_PURPOSE",
        "TYPE_CHARACTERISTICS", "TYPE_BRAINSTORM_FOCUS", "TYPE_REVIEW_POINTS",
        "TYPE_NOTES", "TYPE_STANDARDS",
    }
    for required, optional in _KIND_PARAMS.values():
        tokens.update(k.upper() for k in required)
        tokens.update(k.upper() for k in optional)
    return sorted(tokens)
