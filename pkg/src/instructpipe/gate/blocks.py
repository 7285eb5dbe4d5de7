"""Fenced code block extraction from model responses."""

import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

# Fence info string -> normalized language tag. Anything unlisted is "other".
_FENCE_ALIASES = {
    "python": "python", "py": "python", "python3": "python",
    "javascript": "javascript", "js": "javascript", "node": "javascript",
    "java": "java",
    "c": "c_cpp", "c++": "c_cpp", "cpp": "c_cpp", "cxx": "c_cpp", "cc": "c_cpp",
    "sql": "sql", "mysql": "sql", "postgresql": "sql", "sqlite": "sql", "plsql": "sql",
}


def normalize_fence_language(info_string: str) -> str:
    token = info_string.strip().split()[0].lower() if info_string.strip() else ""
    return _FENCE_ALIASES.get(token, "other")


@dataclass(frozen=True)
class CodeBlock:
    language: str
    info_string: str
    body: str
    start_line: int  # 1-based line of the opening fence in the response


def extract_blocks(response: str) -> list[CodeBlock]:
    """All triple-backtick fenced blocks, in document order.

    An unterminated fence yields a block running to end-of-text (with a
    warning). Blocks whose body is empty after trimming are dropped.
    """
    blocks: list[CodeBlock] = []
    lines = response.splitlines()
    in_fence = False
    info = ""
    fence_line = 0
    body_lines: list[str] = []
    for i, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not in_fence:
            if stripped.startswith("```"):
                in_fence = True
                info = stripped[3:].strip()
                fence_line = i
                body_lines = []
        else:
            if stripped.startswith("```"):
                in_fence = False
                body = "\n".join(body_lines)
                if body.strip():
                    blocks.append(
                        CodeBlock(
                            language=normalize_fence_language(info),
                            info_string=info,
                            body=body,
                            start_line=fence_line,
                        )
                    )
            else:
                body_lines.append(line)
    if in_fence:
        logger.warning("unterminated code fence at line %d; taking block to end of text", fence_line)
        body = "\n".join(body_lines)
        if body.strip():
            blocks.append(
                CodeBlock(
                    language=normalize_fence_language(info),
                    info_string=info,
                    body=body,
                    start_line=fence_line,
                )
            )
    return blocks
