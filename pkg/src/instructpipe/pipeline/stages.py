"""Stage execution scaffolding: seeding, quarantine, resume, manifests.

Every stage follows the same discipline:
  - per-record seeds derive from (run seed, stage name, record id) by
    stable hashing, so partial reruns never shift other records' draws;
  - failing records land in a quarantine file with {stage, reason,
    excerpt}, never silently dropped;
  - a manifest with conservation counts (in = out + rejected) and the
    stage's params digest is written next to the output;
  - rerunning a stage whose manifest matches the params digest is a
    no-op.
"""

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from .records import StageManifest, read_jsonl, write_jsonl
from ..errors import RecordError

logger = logging.getLogger(__name__)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any hashable part sequence."""
    src = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(src.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def stage_digest(stage: str, **params) -> str:
    src = json.dumps({"stage": stage, "params": params}, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(src.encode("utf-8")).hexdigest()


def stage_paths(out_dir: Path, stage: str) -> Tuple[Path, Path, Path]:
    out = out_dir / f"{stage}.jsonl"
    rejects = out_dir / f"{stage}.rejects.jsonl"
    manifest = out_dir / f"{stage}.manifest.json"
    return out, rejects, manifest


def reject_entry(stage: str, reason: str, record_id: str = "", excerpt: str = "") -> dict:
    return {
        "stage": stage,
        "reason": reason,
        "record_id": record_id,
        "excerpt": excerpt[:300],
    }


def load_manifest(path: Path) -> Optional[StageManifest]:
    if not path.exists():
        return None
    return StageManifest.from_dict(json.loads(path.read_text(encoding="utf-8")))


def save_manifest(path: Path, manifest: StageManifest) -> None:
    manifest.check()
    path.write_text(
        json.dumps(manifest.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def try_resume(out_dir: Path, stage: str, params_digest: str) -> Optional[StageManifest]:
    """Previous manifest if the stage already ran with identical parameters."""
    out, _, manifest_path = stage_paths(out_dir, stage)
    manifest = load_manifest(manifest_path)
    if manifest is not None and manifest.params_digest == params_digest and out.exists():
        logger.info("stage %s: params digest matches existing output, skipping", stage)
        return manifest
    return None


def run_stage(
    stage: str,
    items: Sequence,
    fn: Callable,
    out_dir: Path,
    input_path: str,
    rng_seed: int,
    params_digest: str,
    jobs: int = 1,
    item_id: Callable = lambda item: getattr(item, "id", ""),
    to_dict: Callable = lambda item: item.to_dict(),
    extra: Optional[dict] = None,
) -> Tuple[list, StageManifest]:
    """Apply ``fn`` to each item; one output object or one reject per item.

    ``fn`` may return a single result or a list of results (a stage may
    fan out); a RecordError quarantines that item only. Conservation is
    counted over input items.
    """
    resumed = try_resume(out_dir, stage, params_digest)
    out_path, rejects_path, manifest_path = stage_paths(out_dir, stage)
    if resumed is not None:
        return read_jsonl(out_path), resumed

    def one(item):
        try:
            return ("ok", fn(item))
        except RecordError as exc:
            return ("reject", reject_entry(
                stage, f"{type(exc).__name__}: {exc}", item_id(item),
                excerpt=str(item)[:300],
            ))

    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, items))
    else:
        outcomes = [one(item) for item in items]

    outputs: list = []
    rejects: List[dict] = []
    for status, payload in outcomes:
        if status == "ok":
            if isinstance(payload, list):
                outputs.extend(payload)
            else:
                outputs.append(payload)
        else:
            rejects.append(payload)

    write_jsonl(out_path, (to_dict(o) for o in outputs))
    write_jsonl(rejects_path, rejects)
    manifest = StageManifest(
        stage=stage,
        input_path=input_path,
        output_path=out_path.name,
        rejects_path=rejects_path.name,
        rng_seed=rng_seed,
        counts={"in": len(items), "out": len(items) - len(rejects), "rejected": len(rejects)},
        params_digest=params_digest,
        extra=dict(extra or {}, emitted=len(outputs)),
    )
    save_manifest(manifest_path, manifest)
    logger.info(
        "stage %s: in=%d out=%d rejected=%d emitted=%d",
        stage, len(items), len(items) - len(rejects), len(rejects), len(outputs),
    )
    return [to_dict(o) for o in outputs], manifest
