import json

import pytest

from instructpipe.config import PipelineConfig, load_config
from instructpipe.errors import ParseFailure
from instructpipe.gate.rules import RuleConfig
from instructpipe.pipeline.finalize import report, run_gate_stage
from instructpipe.pipeline.records import (
    InstructionRecord,
    LineageEntry,
    StageManifest,
    read_jsonl,
)
from instructpipe.pipeline.stages import (
    derive_seed,
    load_manifest,
    run_stage,
    stage_digest,
    stage_paths,
    try_resume,
)
from instructpipe.scoring import CriteriaAssessment, ScoreCard


class _Item:
    def __init__(self, id, value):
        self.id = id
        self.value = value

    def to_dict(self):
        return {"id": self.id, "value": self.value}


def _double(item):
    if item.value < 0:
        raise ParseFailure("negative value", str(item.value))
    return _Item(item.id, item.value * 2)


class TestDeriveSeed:
    def test_stable_and_distinct(self):
        assert derive_seed(1, "stage", "rec") == derive_seed(1, "stage", "rec")
        assert derive_seed(1, "stage", "a") != derive_seed(1, "stage", "b")
        assert derive_seed(1, "stage", "a") != derive_seed(2, "stage", "a")

    def test_fits_in_63_bits(self):
        for i in range(50):
            assert 0 <= derive_seed("x", i) < 2 ** 63


class TestRunStage:
    def _items(self):
        return [_Item("a", 1), _Item("b", -1), _Item("c", 3)]

    def test_conservation_and_quarantine(self, tmp_path):
        outputs, manifest = run_stage(
            "double", self._items(), _double, tmp_path,
            input_path="in.jsonl", rng_seed=0, params_digest="d1",
        )
        assert [o["value"] for o in outputs] == [2, 6]
        assert manifest.counts == {"in": 3, "out": 2, "rejected": 1}
        manifest.check()
        rejects = read_jsonl(tmp_path / "double.rejects.jsonl")
        assert len(rejects) == 1
        assert rejects[0]["record_id"] == "b"
        assert "negative value" in rejects[0]["reason"]

    def test_fan_out_counts_inputs(self, tmp_path):
        def explode(item):
            return [_Item(f"{item.id}{i}", item.value) for i in range(3)]
        outputs, manifest = run_stage(
            "explode", [_Item("a", 1)], explode, tmp_path,
            input_path="in.jsonl", rng_seed=0, params_digest="d1",
        )
        assert len(outputs) == 3
        assert manifest.counts == {"in": 1, "out": 1, "rejected": 0}
        assert manifest.extra["emitted"] == 3

    def test_resume_skips_matching_digest(self, tmp_path):
        calls = []
        def tracked(item):
            calls.append(item.id)
            return item
        run_stage("s", self._items()[:1], tracked, tmp_path,
                  input_path="i", rng_seed=0, params_digest="same")
        first_calls = list(calls)
        outputs, manifest = run_stage(
            "s", self._items()[:1], tracked, tmp_path,
            input_path="i", rng_seed=0, params_digest="same",
        )
        assert calls == first_calls  # no re-execution
        assert outputs == [{"id": "a", "value": 1}]
        assert manifest.params_digest == "same"

    def test_digest_change_forces_rerun(self, tmp_path):
        calls = []
        def tracked(item):
            calls.append(item.id)
            return item
        run_stage("s", self._items()[:1], tracked, tmp_path,
                  input_path="i", rng_seed=0, params_digest="one")
        run_stage("s", self._items()[:1], tracked, tmp_path,
                  input_path="i", rng_seed=0, params_digest="two")
        assert calls == ["a", "a"]

    def test_parallel_order_preserved(self, tmp_path):
        items = [_Item(str(i), i) for i in range(20)]
        outputs, _ = run_stage(
            "par", items, lambda it: it, tmp_path,
            input_path="i", rng_seed=0, params_digest="d", jobs=4,
        )
        assert [o["id"] for o in outputs] == [str(i) for i in range(20)]

    def test_try_resume_requires_output_file(self, tmp_path):
        run_stage("s", [], lambda it: it, tmp_path,
                  input_path="i", rng_seed=0, params_digest="d")
        out, _, _ = stage_paths(tmp_path, "s")
        assert try_resume(tmp_path, "s", "d") is not None
        out.unlink()
        assert try_resume(tmp_path, "s", "d") is None


class TestStageDigest:
    def test_params_change_digest(self):
        assert stage_digest("s", a=1) == stage_digest("s", a=1)
        assert stage_digest("s", a=1) != stage_digest("s", a=2)
        assert stage_digest("s", a=1) != stage_digest("t", a=1)


class TestManifest:
    def test_conservation_violation_detected(self):
        manifest = StageManifest(
            stage="s", input_path="i", output_path="o", rejects_path="r",
            rng_seed=0, counts={"in": 3, "out": 1, "rejected": 1},
        )
        with pytest.raises(ValueError):
            manifest.check()

    def test_roundtrip(self, tmp_path):
        manifest = StageManifest(
            stage="s", input_path="i", output_path="o", rejects_path="r",
            rng_seed=7, counts={"in": 1, "out": 1, "rejected": 0},
            params_digest="d", extra={"emitted": 2},
        )
        path = tmp_path / "m.json"
        path.write_text(json.dumps(manifest.to_dict()), encoding="utf-8")
        assert load_manifest(path) == manifest
        assert load_manifest(tmp_path / "none.json") is None


def _record(id="r1", flow="reverse", response=None, scorecard=None):
    return InstructionRecord(
        id=id, flow=flow, problem_type="Debug", language="python",
        prompt="Fix the bug.", response=response,
        lineage=[LineageEntry("generate", ("s1",), "digest")],
        scorecard=scorecard,
    )


def _scorecard(complexity=None):
    return ScoreCard(
        assessments=tuple(
            CriteriaAssessment(met=frozenset({1, 2, 3, 4, 5, 6}), raw_text="")
            for _ in range(3)
        ),
        final_score=6.0,
        complexity=complexity,
    )


class TestRecordSerialization:
    def test_roundtrip_minimal(self):
        record = _record()
        again = InstructionRecord.from_dict(record.to_dict())
        assert again.to_dict() == record.to_dict()

    def test_roundtrip_full(self):
        record = _record(response="Here you go.", scorecard=_scorecard(complexity=4))
        again = InstructionRecord.from_dict(record.to_dict())
        assert again.to_dict() == record.to_dict()
        assert again.scorecard.final_score == 6.0
        assert again.scorecard.complexity == 4

    def test_unknown_flow_rejected(self):
        with pytest.raises(ValueError):
            _record(flow="sideways")


class TestGateStage:
    def test_no_code_records_pass(self, tmp_path):
        records = [
            _record(id="r1", response="Prose only answer.", scorecard=_scorecard(3)),
            _record(id="r2", response="Another prose answer.", scorecard=_scorecard(5)),
        ]
        kept, manifest = run_gate_stage(records, RuleConfig(), tmp_path, seed=0)
        assert len(kept) == 2
        assert all(r.gate["status"] == "pass" for r in kept)
        assert all(r.gate["no_code"] for r in kept)
        assert manifest.extra["no_code"] == 2
        assert manifest.counts == {"in": 2, "out": 2, "rejected": 0}


class TestReport:
    def test_summary_shape(self):
        manifest = StageManifest(
            stage="s", input_path="i", output_path="o", rejects_path="r",
            rng_seed=0, counts={"in": 2, "out": 2, "rejected": 0},
        )
        records = [
            _record(id="a", scorecard=_scorecard(4)),
            _record(id="b", flow="backfeed", scorecard=_scorecard(8)),
        ]
        summary = report([manifest], records)
        assert summary["records"] == 2
        assert summary["stages"][0]["counts"]["in"] == 2
        assert summary["quality_score_histogram"] == {"6.00": 2}
        assert set(summary["complexity_stats"]) == {"reverse", "backfeed"}
        assert summary["complexity_stats"]["reverse"]["mean"] == pytest.approx(4.0)


class TestConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert cfg.mode == "replay"
        assert cfg.score_threshold == 6.0
        assert cfg.effective_judge_model == cfg.model

    def test_judge_model_fallback(self):
        assert PipelineConfig(judge_model="j").effective_judge_model == "j"

    def test_precedence_file_env_override(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("seed: 1\njobs: 2\nmodel: file-model\n", encoding="utf-8")
        cfg = load_config(
            path,
            overrides={"seed": 3, "cassette": None},
            env={"INSTRUCTPIPE_SEED": "2", "INSTRUCTPIPE_JOBS": "5"},
        )
        assert cfg.seed == 3        # override beats env beats file
        assert cfg.jobs == 5        # env beats file
        assert cfg.model == "file-model"
        assert cfg.cassette == "cassette.jsonl"  # None override ignored

    def test_unknown_file_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("sedd: 1\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_config(path, env={})

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(mode="stream")
        with pytest.raises(ValueError):
            PipelineConfig(combo_min=5, combo_max=4)
        with pytest.raises(ValueError):
            PipelineConfig(jobs=0)
