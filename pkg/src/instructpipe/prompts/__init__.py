from .templates import (
    ProblemType,
    TemplateKind,
    RenderedPrompt,
    reverse_question,
    backfeed_question,
    COMPLICATE,
    TEXT_REWRITE,
    EXTRACT_TASK,
    EXTRACT_INSTRUCTION,
    EXTRACT_KNOWLEDGE,
    KG_NODES,
    KG_RELATIONS,
    KG_PHRASES,
    QUALITY_FILTER,
    COMPLEXITY_ASSESS,
    COMPLICATE_METHODS,
    all_kinds,
    placeholder_tokens,
    render,
)
from .parsers import (
    ReverseQuestion,
    KeywordDimension,
    parse_reverse_output,
    parse_rewrite_output,
    parse_complicate_output,
    parse_keyword_output,
    parse_backfeed_output,
)

__all__ = [
    "ProblemType",
    "TemplateKind",
    "RenderedPrompt",
    "reverse_question",
    "backfeed_question",
    "COMPLICATE",
    "TEXT_REWRITE",
    "EXTRACT_TASK",
    "EXTRACT_INSTRUCTION",
    "EXTRACT_KNOWLEDGE",
    "KG_NODES",
    "KG_RELATIONS",
    "KG_PHRASES",
    "QUALITY_FILTER",
    "COMPLEXITY_ASSESS",
    "COMPLICATE_METHODS",
    "all_kinds",
    "placeholder_tokens",
    "render",
    "ReverseQuestion",
    "KeywordDimension",
    "parse_reverse_output",
    "parse_rewrite_output",
    "parse_complicate_output",
    "parse_keyword_output",
    "parse_backfeed_output",
]
