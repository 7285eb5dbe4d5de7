import re

import pytest

from instructpipe.errors import MissingPlaceholder, UnknownKind
from instructpipe.prompts import (
    COMPLICATE,
    COMPLICATE_METHODS,
    KG_NODES,
    QUALITY_FILTER,
    TEXT_REWRITE,
    ProblemType,
    TemplateKind,
    all_kinds,
    backfeed_question,
    placeholder_tokens,
    render,
    reverse_question,
)

# minimal valid params per kind name
DUMMY_PARAMS = {
    "reverse_question": {"code_snippet": "print('hi')"},
    "complicate": {"prompt": "Write a parser."},
    "text_rewrite": {"question": "Explain recursion."},
    "extract_task": {"problem": "Sort a list of numbers."},
    "extract_instruction": {"problem": "Sort a list of numbers."},
    "extract_knowledge": {"problem": "Sort a list of numbers."},
    "kg_nodes": {"keywords": "[sorting], [Python]"},
    "kg_relations": {"nodes": 'Node(id="sorting", type="task")'},
    "kg_phrases": {"triples": "sorting contains Python"},
    "backfeed_question": {"keywords": "[sorting], [Python]"},
    "quality_filter": {"prompt": "Write a parser."},
    "complexity_assess": {"question": "Write a parser."},
}


class TestKinds:
    def test_all_kinds_count(self):
        kinds = all_kinds()
        assert len(kinds) == 24  # 7 reverse + 7 backfeed + 10 untyped
        assert len({str(k) for k in kinds}) == 24

    def test_display_names(self):
        assert ProblemType.KNOWLEDGE_QUESTION.display_name == "Knowledge-based Question"
        assert ProblemType.MODIFY_CODE.display_name == "Modify Code as required"
        assert ProblemType.CODE_GENERATION.display_name == "Code Generation"

    def test_complicate_methods(self):
        assert len(COMPLICATE_METHODS) == 6
        assert COMPLICATE_METHODS[0] == "Constraint Addition"
        assert COMPLICATE_METHODS[-1] == "Innovation Variation"


class TestRender:
    @pytest.mark.parametrize("kind", all_kinds(), ids=str)
    def test_every_kind_renders_without_leftover_slots(self, kind):
        rendered = render(kind, DUMMY_PARAMS[kind.name])
        for token in placeholder_tokens():
            assert f"[{token}]" not in rendered.text, f"unresolved [{token}] in {kind}"

    def test_params_are_substituted(self):
        rendered = render(reverse_question(ProblemType.DEBUG), {"code_snippet": "XSNIPPETX"})
        assert "XSNIPPETX" in rendered.text
        assert "Debug" in rendered.text

    def test_literal_brackets_survive(self):
        # the node-extraction template's example keywords are not slots
        rendered = render(KG_NODES, DUMMY_PARAMS["kg_nodes"])
        assert "[HTML]" in rendered.text
        assert "[CSS]" in rendered.text

    def test_method_directive_optional(self):
        base = render(COMPLICATE, {"prompt": "p"})
        directed = render(COMPLICATE, {"prompt": "p", "method_directive": "Use X."})
        assert "Use X." in directed.text
        assert "Use X." not in base.text
        assert "[METHOD_DIRECTIVE]" not in base.text

    def test_missing_required_raises(self):
        with pytest.raises(MissingPlaceholder):
            render(COMPLICATE, {})

    def test_unknown_kind_raises(self):
        with pytest.raises(UnknownKind):
            render(TemplateKind("mystery"), {})

    def test_typed_kind_requires_type(self):
        with pytest.raises(UnknownKind):
            render(TemplateKind("reverse_question"), DUMMY_PARAMS["reverse_question"])

    def test_no_blank_runs(self):
        rendered = render(COMPLICATE, {"prompt": "p"})
        assert "\n\n\n" not in rendered.text


class TestDigest:
    def test_same_inputs_same_digest(self):
        a = render(TEXT_REWRITE, {"question": "q"})
        b = render(TEXT_REWRITE, {"question": "q"})
        assert a.params_digest == b.params_digest
        assert a.text == b.text

    def test_param_change_changes_digest(self):
        a = render(TEXT_REWRITE, {"question": "q"})
        b = render(TEXT_REWRITE, {"question": "q2"})
        assert a.params_digest != b.params_digest

    def test_problem_type_changes_digest(self):
        params = DUMMY_PARAMS["backfeed_question"]
        a = render(backfeed_question(ProblemType.DEBUG), params)
        b = render(backfeed_question(ProblemType.CODE_GENERATION), params)
        assert a.params_digest != b.params_digest
        assert a.text != b.text

    def test_digest_is_hex_sha256(self):
        rendered = render(QUALITY_FILTER, {"prompt": "p"})
        assert re.fullmatch(r"[0-9a-f]{64}", rendered.params_digest)
