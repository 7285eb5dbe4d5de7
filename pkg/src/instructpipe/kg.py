"""Keyword knowledge graph: vocabularies, nodes, triples, and groups.

Keyword groups are extracted as connected components over the
non-unrelated triples, ordered task first, then knowledge points, then
instructions. Groups are deduplicated by cosine similarity over a
deterministic local embedding (hashed character 3-gram term frequencies),
so the 0.8 threshold is reproducible offline.
"""

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import IllegalRelation, ParseFailure, UnknownNode

EMBEDDING_DIM = 1024
DEDUP_THRESHOLD = 0.8


class NodeKind(str, Enum):
    TASK = "task"
    INSTRUCTION = "instruction"
    KNOWLEDGE_POINT = "knowledge point"


class Relation(str, Enum):
    REQUIRES = "requires"
    CONTAINS = "contains"
    DISPLAYS = "displays"
    UNRELATED = "unrelated"


# Permitted (subject kind, object kind) pairs per relation. ``unrelated``
# is legal for any pair.
_LEGAL_PAIRS = {
    Relation.REQUIRES: {(NodeKind.TASK, NodeKind.INSTRUCTION)},
    Relation.CONTAINS: {(NodeKind.TASK, NodeKind.KNOWLEDGE_POINT)},
    Relation.DISPLAYS: {
        (NodeKind.INSTRUCTION, NodeKind.KNOWLEDGE_POINT),
        (NodeKind.KNOWLEDGE_POINT, NodeKind.INSTRUCTION),
    },
}


@dataclass(frozen=True)
class KeywordNode:
    id: str
    kind: NodeKind

    def __post_init__(self):
        if not self.id:
            raise ValueError("node id must be non-empty")


@dataclass(frozen=True)
class Triple:
    subject: KeywordNode
    relation: Relation
    object: KeywordNode

    def __post_init__(self):
        if self.relation is Relation.UNRELATED:
            return
        pair = (self.subject.kind, self.object.kind)
        if pair not in _LEGAL_PAIRS[self.relation]:
            raise IllegalRelation(
                f"{self.subject.kind.value} {self.relation.value} {self.object.kind.value}"
                f" ({self.subject.id!r} -> {self.object.id!r})"
            )

    @property
    def id(self) -> str:
        return f"{self.subject.id}|{self.relation.value}|{self.object.id}"


@dataclass
class KeywordGroup:
    members: List[str]  # task first, then knowledge points, then instructions
    embedding: np.ndarray
    lineage: List[str] = field(default_factory=list)  # contributing triple ids

    def __post_init__(self):
        if not self.members:
            raise ValueError("group must have members")
        if len(set(self.members)) != len(self.members):
            raise ValueError("duplicate group members")
        norm = float(np.linalg.norm(self.embedding))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"embedding not unit-norm: {norm}")

    def to_dict(self, emit_embedding: bool = False) -> dict:
        d = {"members": list(self.members), "lineage": list(self.lineage)}
        if emit_embedding:
            d["embedding"] = [float(x) for x in self.embedding]
        return d


class Vocabulary:
    """Per-kind keyword store with exact-duplicate-free insertion."""

    def __init__(self):
        self._words: Dict[NodeKind, List[str]] = {k: [] for k in NodeKind}
        self._seen: Dict[NodeKind, Set[str]] = {k: set() for k in NodeKind}

    def add(self, keyword: str, kind: NodeKind) -> bool:
        keyword = keyword.strip()
        if not keyword or keyword in self._seen[kind]:
            return False
        self._seen[kind].add(keyword)
        self._words[kind].append(keyword)
        return True

    def words(self, kind: Optional[NodeKind] = None) -> List[str]:
        if kind is not None:
            return list(self._words[kind])
        return [w for k in NodeKind for w in self._words[k]]

    def ingest_file(self, path: str | Path, kind: NodeKind) -> int:
        """One keyword per line, trimmed, case-preserved. Returns insert count."""
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(path)
        inserted = 0
        for line in path.read_text(encoding="utf-8").splitlines():
            if self.add(line, kind):
                inserted += 1
        return inserted


_NODE_LINE = re.compile(
    r"""Node\(\s*id\s*=\s*(['"])(?P<id>.*?)\1\s*,\s*type\s*=\s*(['"])(?P<type>.*?)\3\s*\)"""
)

_NODE_KIND_ALIASES = {
    "task": NodeKind.TASK,
    "instruction": NodeKind.INSTRUCTION,
    "knowledge point": NodeKind.KNOWLEDGE_POINT,
    "knowledge_point": NodeKind.KNOWLEDGE_POINT,
    "knowledgepoint": NodeKind.KNOWLEDGE_POINT,
}


def parse_nodes(text: str) -> Tuple[List[KeywordNode], List[ParseFailure]]:
    """Parse Node(id="...", type="...") lines; per-line failures are collected."""
    nodes: List[KeywordNode] = []
    failures: List[ParseFailure] = []
    seen: Set[Tuple[str, NodeKind]] = set()
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or "Node(" not in stripped:
            continue
        m = _NODE_LINE.search(stripped)
        if m is None:
            failures.append(ParseFailure("malformed node line", stripped))
            continue
        node_id = m.group("id").strip()
        kind = _NODE_KIND_ALIASES.get(m.group("type").strip().lower())
        if not node_id:
            failures.append(ParseFailure("empty node id", stripped))
            continue
        if kind is None:
            failures.append(ParseFailure(f"unknown node type {m.group('type')!r}", stripped))
            continue
        key = (node_id, kind)
        if key in seen:
            continue
        seen.add(key)
        nodes.append(KeywordNode(id=node_id, kind=kind))
    return nodes, failures


# Relation keywords as they appear in model output, longest alias first so
# "unrelated to" wins over "unrelated".
_RELATION_ALIASES: List[Tuple[str, Relation]] = [
    ("unrelated to", Relation.UNRELATED),
    ("unrelated", Relation.UNRELATED),
    ("requires", Relation.REQUIRES),
    ("needs", Relation.REQUIRES),
    ("contains", Relation.CONTAINS),
    ("displays", Relation.DISPLAYS),
    ("based on", Relation.DISPLAYS),
]


def _canonical_relation(subj: KeywordNode, obj: KeywordNode) -> Optional[Relation]:
    """The one legal non-unrelated relation for a kind pair, if any."""
    pair = (subj.kind, obj.kind)
    for relation, pairs in _LEGAL_PAIRS.items():
        if pair in pairs:
            return relation
    return None


def parse_triples(
    text: str, nodes: Iterable[KeywordNode], strict: bool = True
) -> List[Triple]:
    """Parse "subject <relation> object" lines against a known node set.

    In strict mode the relation word is taken at face value: both
    endpoints must resolve to known nodes and the relation must be legal
    for their kinds, else UnknownNode / IllegalRelation. In lenient mode
    (model output with sloppy relation words) any non-unrelated word is
    canonicalized to the legal relation for the kind pair, and lines that
    cannot be made legal are skipped.
    """
    by_id: Dict[str, KeywordNode] = {n.id: n for n in nodes}
    triples: List[Triple] = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        parsed = None
        for alias, relation in _RELATION_ALIASES:
            idx = stripped.find(f" {alias} ")
            if idx < 0:
                continue
            subj_id = stripped[:idx].strip()
            obj_id = stripped[idx + len(alias) + 2:].strip()
            if subj_id in by_id and obj_id in by_id:
                parsed = (by_id[subj_id], relation, by_id[obj_id])
                break
            parsed = parsed or ("unknown", subj_id, obj_id)
        if parsed is None:
            continue  # prose line, no relation keyword
        if parsed[0] == "unknown":
            if not strict:
                continue
            _, subj_id, obj_id = parsed
            missing = subj_id if subj_id not in by_id else obj_id
            raise UnknownNode(f"{missing!r} in line {stripped!r}")
        subj, relation, obj = parsed
        if not strict and relation is not Relation.UNRELATED:
            relation = _canonical_relation(subj, obj)
            if relation is None:
                continue
        triples.append(Triple(subject=subj, relation=relation, object=obj))
    return triples


def build_groups(triples: Sequence[Triple]) -> List[KeywordGroup]:
    """Connected components over non-unrelated triples, one group per task.

    Components without a task node, or held together only by unrelated
    edges, contribute nothing (the no-relevance case). Members are ordered
    task, knowledge points, instructions, each in first-seen order.
    """
    related = [t for t in triples if t.relation is not Relation.UNRELATED]
    if not related:
        return []

    parent: Dict[KeywordNode, KeywordNode] = {}

    def find(n: KeywordNode) -> KeywordNode:
        while parent[n] is not n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    def union(a: KeywordNode, b: KeywordNode) -> None:
        ra, rb = find(a), find(b)
        if ra is not rb:
            parent[rb] = ra

    order: List[KeywordNode] = []
    for t in related:
        for n in (t.subject, t.object):
            if n not in parent:
                parent[n] = n
                order.append(n)
        union(t.subject, t.object)

    components: Dict[KeywordNode, List[KeywordNode]] = {}
    for n in order:
        components.setdefault(find(n), []).append(n)

    groups: List[KeywordGroup] = []
    for members in components.values():
        tasks = [n for n in members if n.kind is NodeKind.TASK]
        if not tasks:
            continue
        knowledge = [n.id for n in members if n.kind is NodeKind.KNOWLEDGE_POINT]
        instructions = [n.id for n in members if n.kind is NodeKind.INSTRUCTION]
        component_ids = {n for n in members}
        lineage = [t.id for t in related
                   if t.subject in component_ids or t.object in component_ids]
        for task in tasks:
            ordered = [task.id] + knowledge + instructions
            groups.append(
                KeywordGroup(members=ordered, embedding=embed_members(ordered), lineage=lineage)
            )
    return groups


def _char_ngrams(text: str, n: int = 3) -> Iterable[str]:
    padded = f" {text} "
    for i in range(len(padded) - n + 1):
        yield padded[i:i + n]


def embed_members(members: Sequence[str], dim: int = EMBEDDING_DIM) -> np.ndarray:
    """Hashed character 3-gram term-frequency embedding, L2-normalized.

    Members are joined in sorted order first, so permutations of the same
    member set embed identically.
    """
    joined = " ".join(sorted(members)).lower()
    vec = np.zeros(dim, dtype=np.float64)
    for gram in _char_ngrams(joined):
        h = hashlib.md5(gram.encode("utf-8")).digest()
        vec[int.from_bytes(h[:8], "big") % dim] += 1.0
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        vec[0] = 1.0
        norm = 1.0
    return vec / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    # Embeddings are unit-norm, so the dot product is the cosine.
    return float(np.dot(a, b))


def dedup_groups(
    groups: Sequence[KeywordGroup], threshold: float = DEDUP_THRESHOLD
) -> List[KeywordGroup]:
    """Greedy scan in input order; drop when similarity to a kept group >= threshold."""
    kept: List[KeywordGroup] = []
    if not groups:
        return kept
    kept_matrix: List[np.ndarray] = []
    for group in groups:
        if kept_matrix:
            sims = np.asarray(kept_matrix) @ group.embedding
            if float(np.max(sims)) >= threshold:
                continue
        kept.append(group)
        kept_matrix.append(group.embedding)
    return kept
