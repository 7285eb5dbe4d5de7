import itertools
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instructpipe.errors import (
    EmptyInput,
    OutOfRange,
    ParseFailure,
    ScoringIncomplete,
)
from instructpipe.scoring import (
    ASSESSMENT_COUNT,
    SCORE_CUTOFF,
    CriteriaAssessment,
    DistributionStats,
    ScoreCard,
    distribution_stats,
    filter_by_score,
    final_score,
    parse_complexity,
    parse_standards_met,
    score_prompt,
)
from tests.conftest import make_gateway


class TestParseStandardsMet:
    def test_documented_example_list(self):
        # the format example shipped in the judging template itself
        text = "Evaluation Process: reasoning here\nStandards Met: [1, 2, 4, 6, 7]"
        assessment = parse_standards_met(text)
        assert sorted(assessment.met) == [1, 2, 4, 6, 7]
        assert assessment.score == 5

    def test_last_marker_wins(self):
        text = "Standards Met: [1]\nOn reflection...\nStandards Met: [2, 3]"
        assert sorted(parse_standards_met(text).met) == [2, 3]

    def test_empty_list(self):
        assert parse_standards_met("Standards Met: []").score == 0

    def test_markdown_emphasis(self):
        assert parse_standards_met("**Standards Met**: [7]").score == 1

    def test_duplicates_counted_once(self):
        assert parse_standards_met("Standards Met: [3, 3, 3]").score == 1

    def test_missing_marker(self):
        with pytest.raises(ParseFailure):
            parse_standards_met("no verdict here")

    def test_missing_list(self):
        with pytest.raises(ParseFailure):
            parse_standards_met("Standards Met: none of them")

    def test_out_of_range_criterion(self):
        with pytest.raises(OutOfRange):
            parse_standards_met("Standards Met: [0]")
        with pytest.raises(OutOfRange):
            parse_standards_met("Standards Met: [8]")

    def test_non_integer_token(self):
        with pytest.raises(ParseFailure):
            parse_standards_met("Standards Met: [one, two]")


class TestFinalScore:
    def _assessment(self, met):
        return CriteriaAssessment(met=frozenset(met), raw_text="")

    def test_mean_of_met_counts(self):
        assessments = [
            self._assessment({1, 2, 3, 4, 5}),
            self._assessment({1, 2, 3, 4, 5, 6}),
            self._assessment({1, 2, 3, 4, 5, 6, 7}),
        ]
        assert final_score(assessments) == pytest.approx(6.0)

    def test_exhaustive_small_cases(self):
        """Mean of |met| matches a brute-force count over all size triples."""
        sizes = range(0, 8)
        for a, b, c in itertools.product(sizes, repeat=3):
            assessments = [
                self._assessment(set(range(1, a + 1))),
                self._assessment(set(range(1, b + 1))),
                self._assessment(set(range(1, c + 1))),
            ]
            assert final_score(assessments) == pytest.approx((a + b + c) / 3)


class TestScoreCard:
    def _assessments(self, *counts):
        return tuple(
            CriteriaAssessment(met=frozenset(range(1, c + 1)), raw_text="")
            for c in counts
        )

    def test_to_dict(self):
        card = ScoreCard(assessments=self._assessments(5, 6, 7), final_score=6.0)
        assert card.to_dict() == {
            "met_lists": [[1, 2, 3, 4, 5], [1, 2, 3, 4, 5, 6], [1, 2, 3, 4, 5, 6, 7]],
            "final_score": 6.0,
            "complexity": None,
        }

    def test_wrong_assessment_count(self):
        with pytest.raises(ValueError):
            ScoreCard(assessments=self._assessments(5, 6), final_score=5.5)

    def test_complexity_bounds(self):
        ScoreCard(assessments=self._assessments(5, 6, 7), final_score=6.0, complexity=10)
        with pytest.raises(OutOfRange):
            ScoreCard(assessments=self._assessments(5, 6, 7), final_score=6.0, complexity=11)


class _Record:
    def __init__(self, scorecard):
        self.scorecard = scorecard


class TestFilterByScore:
    def _record(self, score):
        counts = [int(score)] * 3
        # distribute the fractional part across assessments
        remainder = round((score - int(score)) * 3)
        for i in range(remainder):
            counts[i] += 1
        card = ScoreCard(
            assessments=tuple(
                CriteriaAssessment(met=frozenset(range(1, c + 1)), raw_text="")
                for c in counts
            ),
            final_score=sum(counts) / 3,
        )
        return _Record(card)

    def test_cutoff_is_inclusive(self):
        kept, dropped = filter_by_score([self._record(6.0), self._record(6 - 1 / 3)])
        assert len(kept) == 1 and len(dropped) == 1
        assert kept[0].scorecard.final_score == pytest.approx(SCORE_CUTOFF)

    def test_missing_scorecard_dropped(self):
        kept, dropped = filter_by_score([_Record(None)])
        assert kept == [] and len(dropped) == 1

    @given(st.lists(st.integers(0, 21), max_size=30))
    @settings(max_examples=30, deadline=None)
    def test_partition_property(self, totals):
        records = [self._record(t / 3) for t in [min(t, 21) for t in totals]]
        kept, dropped = filter_by_score(records)
        assert len(kept) + len(dropped) == len(records)
        assert all(r.scorecard.final_score >= SCORE_CUTOFF for r in kept)
        assert all(r.scorecard.final_score < SCORE_CUTOFF for r in dropped)


class TestScorePrompt:
    def test_three_assessments_averaged(self, tmp_path):
        gw = make_gateway(lambda req: "Standards Met: [1, 2, 4, 6, 7]", tmp_path)
        card = score_prompt("Write a parser.", gw, mode="live", model="m")
        assert len(card.assessments) == ASSESSMENT_COUNT
        assert card.final_score == pytest.approx(5.0)

    def test_unparseable_judgement_raises_incomplete(self, tmp_path):
        gw = make_gateway(lambda req: "I refuse to answer in the format", tmp_path)
        with pytest.raises(ScoringIncomplete):
            score_prompt("Write a parser.", gw, mode="live", model="m")


class TestParseComplexity:
    def test_json_object(self):
        assert parse_complexity('Json Output:\n{"score": 7}') == 7

    def test_last_section_wins(self):
        text = 'Json Output: {"score": 2}\nrevised\nJson Output: {"score": 9}'
        assert parse_complexity(text) == 9

    def test_bare_integer_fallback(self):
        assert parse_complexity("Json Output: 4") == 4

    def test_alternate_key(self):
        assert parse_complexity('Json Output: {"difficulty": 3}') == 3

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            parse_complexity('Json Output: {"score": 11}')
        with pytest.raises(OutOfRange):
            parse_complexity('Json Output: {"score": 0}')

    def test_missing_section(self):
        with pytest.raises(ParseFailure):
            parse_complexity("the difficulty is about seven")


class TestDistributionStats:
    def test_against_statistics_module(self):
        scores = [3, 7, 7, 2, 9, 5, 5, 1]
        stats = distribution_stats(scores)
        assert stats.mean == pytest.approx(statistics.fmean(scores))
        assert stats.median == pytest.approx(statistics.median(scores))
        assert stats.std == pytest.approx(statistics.pstdev(scores))
        assert stats.count == len(scores)

    def test_direct_formula(self):
        scores = [1, 2, 3, 4]
        stats = distribution_stats(scores)
        mean = sum(scores) / len(scores)
        var = sum((s - mean) ** 2 for s in scores) / len(scores)
        assert stats.mean == pytest.approx(mean, abs=1e-12)
        assert stats.std == pytest.approx(var ** 0.5, abs=1e-12)

    def test_single_value(self):
        stats = distribution_stats([5])
        assert stats == DistributionStats(mean=5.0, median=5.0, std=0.0, count=1)

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            distribution_stats([])
