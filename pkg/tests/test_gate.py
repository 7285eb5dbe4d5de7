import pytest

from instructpipe.gate.report import LintIssue, LintReport, Position, Severity
from instructpipe.gate.rules import RuleConfig, ToolRules, load_rule_config
from instructpipe.gate.runner import (
    GateVerdict,
    _eslint_flat_config,
    gate_pair,
    verdict_from_reports,
)


def _issue(severity, rule="r1", line=1):
    return LintIssue(
        rule_name=rule,
        message="m",
        position=Position(start_line=line, end_line=line),
        severity=severity,
        content="",
        language="Python",
    )


class TestToolRules:
    def test_tiers_classify(self):
        rules = ToolRules(disabled={"off"}, error={"bad"}, info={"meh"})
        assert rules.classify({"off"}, native_error=True) is None
        assert rules.classify({"bad"}, native_error=False) is Severity.ERROR
        assert rules.classify({"meh"}, native_error=True) is Severity.INFO

    def test_default_policy_follows_native_severity(self):
        rules = ToolRules()
        assert rules.classify({"anything"}, native_error=True) is Severity.ERROR
        assert rules.classify({"anything"}, native_error=False) is Severity.INFO

    def test_disabled_wins_over_error(self):
        rules = ToolRules(disabled={"a"}, error={"b"})
        assert rules.classify({"a", "b"}, native_error=True) is None

    @pytest.mark.parametrize("kwargs", [
        {"disabled": {"x"}, "error": {"x"}},
        {"disabled": {"x"}, "info": {"x"}},
        {"error": {"x"}, "info": {"x"}},
    ])
    def test_overlapping_tiers_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ToolRules(**kwargs)


class TestRuleConfigFile:
    def test_yaml_roundtrip(self, tmp_path):
        path = tmp_path / "rules.yaml"
        path.write_text(
            "eslint:\n"
            "  disabled: [no-console]\n"
            "  error: [eqeqeq]\n"
            "pylint:\n"
            "  info: [missing-module-docstring]\n",
            encoding="utf-8",
        )
        config = load_rule_config(path)
        assert config.for_tool("eslint").disabled == {"no-console"}
        assert config.for_tool("eslint").error == {"eqeqeq"}
        assert config.for_tool("pylint").info == {"missing-module-docstring"}
        # unlisted tool falls back to an empty default
        assert config.for_tool("sqlfluff").error == set()

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_rule_config(tmp_path / "none.yaml")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "rules.yaml"
        path.write_text("", encoding="utf-8")
        assert load_rule_config(path).tools == {}


class TestLintReport:
    def test_status_derived_from_issues(self):
        report = LintReport.from_issues([_issue(Severity.INFO)])
        assert report.status == "pass"
        report = LintReport.from_issues([_issue(Severity.INFO), _issue(Severity.ERROR)])
        assert report.status == "fail"

    def test_inconsistent_status_rejected(self):
        with pytest.raises(ValueError):
            LintReport(issues=[_issue(Severity.ERROR)], status="pass")

    def test_to_dict_shape(self):
        report = LintReport.from_issues([_issue(Severity.ERROR, rule="E1", line=3)])
        d = report.to_dict()
        assert d["status"] == "fail"
        assert d["issues"][0] == {
            "rule_name": "E1",
            "message": "m",
            "position": {"start_line": 3, "end_line": 3},
            "severity": "error",
            "content": "",
            "language": "Python",
        }

    def test_position_order_enforced(self):
        with pytest.raises(ValueError):
            Position(start_line=5, end_line=4)


class TestVerdict:
    def test_no_code_passes(self):
        verdict = verdict_from_reports([], had_blocks=False)
        assert verdict.status == "pass"
        assert verdict.no_code is True

    def test_any_failing_report_fails(self):
        ok = LintReport.from_issues([_issue(Severity.INFO)])
        bad = LintReport.from_issues([_issue(Severity.ERROR)])
        assert verdict_from_reports([ok, ok], had_blocks=True).status == "pass"
        assert verdict_from_reports([ok, bad], had_blocks=True).status == "fail"

    def test_to_dict(self):
        verdict = GateVerdict(status="pass", reports=[], no_code=True)
        assert verdict.to_dict() == {"status": "pass", "no_code": True, "reports": []}


class TestGatePair:
    def test_prose_only_response_passes_without_tools(self):
        verdict, blocks = gate_pair("No code here, just an explanation.", RuleConfig())
        assert verdict.status == "pass"
        assert verdict.no_code is True
        assert blocks == []

    def test_prose_reordering_does_not_change_verdict(self):
        a = "First paragraph.\n\nSecond paragraph."
        b = "Second paragraph.\n\nFirst paragraph."
        va, _ = gate_pair(a, RuleConfig())
        vb, _ = gate_pair(b, RuleConfig())
        assert va.to_dict() == vb.to_dict()


class TestEslintFlatConfig:
    def test_tiers_map_to_eslint_levels(self):
        config = RuleConfig(tools={"eslint": ToolRules(
            error={"eqeqeq"}, info={"no-unused-vars"}, disabled={"no-console"},
        )})
        text = _eslint_flat_config(config)
        assert '"eqeqeq": "error"' in text
        assert '"no-unused-vars": "warn"' in text
        assert "no-console" not in text
        assert text.startswith("export default [")
