from __future__ import annotations

import pytest

from esgbench.baseline import Tier
from esgbench.errors import ConfigError, DataError, TransportError
from esgbench.llm import LlmResponse, StubClient
from esgbench.recommend import (
    RUBRIC_DIMENSIONS,
    FlagPolicy,
    FlagRecord,
    RubricScores,
    build_prompt,
    feedback_line,
    generate,
    record_rubric,
    round_half_up,
    select_flagged,
)


class _FlakyClient:
    """Fails on chosen prompts, otherwise answers like a fixed stub."""

    model_id = "flaky-model"

    def __init__(self, fail_on=()):
        self.fail_on = tuple(fail_on)
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        for marker in self.fail_on:
            if marker in prompt:
                raise TransportError(
                    "model endpoint unavailable after 4 attempts: endpoint "
                    "returned status 503"
                )
        return LlmResponse(
            text="Fine advice.",
            model_id=self.model_id,
            retries=0,
            latency_s=0.01,
            timestamp_utc="2025-01-01T00:00:00Z",
        )


def test_round_half_up_at_the_boundary():
    assert round_half_up(6.751) == "6.75"
    assert round_half_up(6.996) == "7.00"
    assert round_half_up(2.005) == "2.01"
    assert round_half_up(2.675) == "2.68"
    assert round_half_up(0.125) == "0.13"
    assert round_half_up(9.0) == "9.00"
    assert round_half_up(10.0) == "10.00"


def test_feedback_line_exact_strings():
    assert feedback_line(6.751) == "Scored only 6.75/10."
    assert feedback_line(6.996) == "Scored only 7.00/10."
    assert feedback_line(1.0) == "Scored only 1.00/10."


def test_tier_policy_flags_weak_and_average():
    entries = [
        ("AA", 1.2, Tier.WEAK),
        ("AB", 3.4, Tier.AVERAGE),
        ("AC", 5.6, Tier.GOOD),
        ("AD", 8.9, Tier.EXCELLENT),
    ]
    flagged = select_flagged(entries, "ESG")
    assert [f.country for f in flagged] == ["AA", "AB"]
    assert all(f.group == "ESG" for f in flagged)


def test_threshold_policy_flags_strictly_below():
    entries = [
        ("AA", 4.0, Tier.GOOD),
        ("AB", 3.999, Tier.AVERAGE),
        ("AC", 2.0, Tier.WEAK),
    ]
    policy = FlagPolicy(mode="threshold", threshold=4.0)
    flagged = select_flagged(entries, "GOV", policy)
    assert [f.country for f in flagged] == ["AC", "AB"]


def test_flag_ordering_is_tier_then_score_then_country():
    entries = [
        ("BZ", 2.0, Tier.AVERAGE),
        ("BA", 2.0, Tier.AVERAGE),
        ("AA", 3.5, Tier.AVERAGE),
        ("ZZ", 0.5, Tier.WEAK),
    ]
    flagged = select_flagged(entries, "ESG")
    assert [f.country for f in flagged] == ["ZZ", "BA", "BZ", "AA"]


def test_flag_policy_validation():
    with pytest.raises(ConfigError):
        FlagPolicy(mode="quantile")
    with pytest.raises(ConfigError):
        FlagPolicy(mode="threshold")


def test_default_prompt_renders_all_fields():
    flag = FlagRecord(country="AQ", group="GOV", score=2.345, tier=Tier.WEAK)
    prompt = build_prompt(flag)
    assert "Country AQ scored 2.35/10 on Governance" in prompt
    assert "sits in the Weak tier" in prompt
    assert "Do not invent" in prompt


def test_prompt_names_the_composite_axis():
    flag = FlagRecord(country="AQ", group="ESG", score=2.0, tier=Tier.WEAK)
    assert "on the overall ESG composite" in build_prompt(flag)


def test_prompt_template_override():
    flag = FlagRecord(country="AQ", group="CLI", score=3.0, tier=Tier.AVERAGE)
    prompt = build_prompt(
        flag, template="{country}|{score}|{tier}|{pillar}"
    )
    assert prompt == "AQ|3.00|Average|Climate Strategy"


def test_prompt_template_missing_placeholder_is_config_error():
    flag = FlagRecord(country="AQ", group="GOV", score=3.0, tier=Tier.AVERAGE)
    with pytest.raises(ConfigError) as excinfo:
        build_prompt(flag, template="{country} {score} {tier}")
    assert "{pillar}" in str(excinfo.value)


def test_generate_with_stub_produces_ok_records():
    flags = select_flagged(
        [("AA", 1.2, Tier.WEAK), ("AB", 3.4, Tier.AVERAGE)], "ESG"
    )
    records = generate(flags, StubClient(model_id="advisor-stub-1"))
    assert [r.country for r in records] == ["AA", "AB"]
    for record, flag in zip(records, flags):
        assert record.status == "ok"
        assert record.error is None
        assert record.feedback == flag.feedback
        assert record.prompt == build_prompt(flag)
        assert record.response_text.startswith("[stub ")
        assert record.model_id == "advisor-stub-1"


def test_generate_continues_past_transport_failures():
    flags = select_flagged(
        [
            ("AA", 1.2, Tier.WEAK),
            ("AB", 3.4, Tier.AVERAGE),
            ("AC", 3.5, Tier.AVERAGE),
        ],
        "ESG",
    )
    client = _FlakyClient(fail_on=("Country AB ",))
    records = generate(flags, client)
    assert [r.status for r in records] == ["ok", "error", "ok"]
    failed = records[1]
    assert failed.response_text is None
    assert "after 4 attempts" in failed.error
    assert failed.retries == 0
    assert failed.latency_s == 0.0
    assert failed.timestamp_utc == ""
    assert len(client.prompts) == 3


def test_generate_preserves_flag_order():
    flags = select_flagged(
        [("C", 1.0, Tier.WEAK), ("A", 2.0, Tier.WEAK), ("B", 1.5, Tier.WEAK)],
        "GOV",
    )
    records = generate(flags, StubClient())
    assert [r.country for r in records] == ["C", "B", "A"]


def test_rubric_dimensions_are_fixed():
    assert RUBRIC_DIMENSIONS == ("relevance", "actionability", "faithfulness")


def test_record_rubric_builds_one_matrix_per_dimension():
    entries = [
        RubricScores(rater="r2", item="AA", relevance=4, actionability=3, faithfulness=5),
        RubricScores(rater="r1", item="AA", relevance=5, actionability=3, faithfulness=5),
        RubricScores(rater="r1", item="AB", relevance=2, actionability=2, faithfulness=4),
        RubricScores(rater="r2", item="AB", relevance=3, actionability=2, faithfulness=4),
    ]
    matrices = record_rubric(entries)
    assert set(matrices) == set(RUBRIC_DIMENSIONS)
    rel = matrices["relevance"]
    assert rel.raters == ("r2", "r1")  # first-appearance order
    assert rel.items == ("AA", "AB")
    assert rel.values == ((4.0, 3.0), (5.0, 2.0))


def test_record_rubric_missing_cells_stay_none():
    entries = [
        RubricScores(rater="r1", item="AA", relevance=4),
        RubricScores(rater="r2", item="AB", relevance=3, actionability=1),
    ]
    matrices = record_rubric(entries)
    assert matrices["relevance"].values == ((4.0, None), (None, 3.0))
    assert matrices["actionability"].values == ((None, None), (None, 1.0))


def test_record_rubric_rejects_duplicates():
    entries = [
        RubricScores(rater="r1", item="AA", relevance=4),
        RubricScores(rater="r1", item="AA", relevance=5),
    ]
    with pytest.raises(DataError) as excinfo:
        record_rubric(entries)
    assert "duplicate" in str(excinfo.value)


def test_rubric_scores_validate_scale():
    with pytest.raises(DataError):
        RubricScores(rater="r1", item="AA", relevance=0)
    with pytest.raises(DataError):
        RubricScores(rater="r1", item="AA", actionability=6)
    with pytest.raises(DataError):
        RubricScores(rater="r1", item="AA", faithfulness=3.5)  # type: ignore[arg-type]
    RubricScores(rater="r1", item="AA", relevance=1, actionability=5)
