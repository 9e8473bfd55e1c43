from __future__ import annotations

import pytest

from esgbench.errors import ConfigError
from esgbench.taxonomy import (
    COMPOSITE_GROUP,
    GROUP_ORDER,
    PILLAR_ORDER,
    Pillar,
    ResponseType,
    dx5_option_scores,
    load_registry,
    registry_from_dict,
)


def test_pillar_order_and_group_order():
    assert [p.code for p in PILLAR_ORDER] == ["GOV", "ENE", "BIO", "CLI"]
    assert GROUP_ORDER == ("GOV", "ENE", "BIO", "CLI", "ESG")
    assert COMPOSITE_GROUP == "ESG"


def test_pillar_display_names():
    displays = {p.code: p.display for p in PILLAR_ORDER}
    assert displays == {
        "GOV": "Governance",
        "ENE": "Energy & Circular Economy",
        "BIO": "Biodiversity",
        "CLI": "Climate Strategy",
    }


def test_dx5_option_scores_exact():
    midpoints = [0.0, 3.0, 7.5, 30.0, 75.0, 120.0]
    labels = ["0", "1-5", "6-9", "10-50", "51-100", "101+"]
    scores = dx5_option_scores(midpoints, labels)
    expected = {
        "0": 0.0,
        "1-5": 0.25,
        "6-9": 0.625,
        "10-50": 2.5,
        "51-100": 6.25,
        "101+": 10.0,
    }
    assert set(scores) == set(expected)
    for label, want in expected.items():
        assert scores[label] == pytest.approx(want, abs=1e-12)


def test_dx5_rejects_degenerate_midpoints():
    with pytest.raises(ConfigError):
        dx5_option_scores([5.0, 5.0, 5.0])


def test_fixture_registry_loads(fixture_dir):
    registry = load_registry(fixture_dir / "registry.json")
    assert len(registry) == 10
    assert "DX5" in registry
    dx5 = registry.spec("DX5")
    assert dx5.rtype is ResponseType.WRITE_DOWN_BINNED
    assert dx5.pillar is Pillar.ENE
    assert dx5.option_scores["101+"] == pytest.approx(10.0, abs=1e-12)


def test_registry_question_order_is_declaration_order(fixture_dir):
    registry = load_registry(fixture_dir / "registry.json")
    assert list(registry.questions) == [
        "QG1",
        "QG2",
        "QE1",
        "QE2",
        "QE3",
        "DX5",
        "QB1",
        "QB2",
        "QC1",
        "QC2",
    ]


def test_registry_rejects_unknown_pillar():
    with pytest.raises(ConfigError):
        registry_from_dict(
            {
                "questions": [
                    {
                        "id": "Q1",
                        "type": "single",
                        "pillar": "XXX",
                        "options": {"yes": 10.0},
                        "na": [],
                        "weight": 1.0,
                    }
                ]
            }
        )


def test_registry_rejects_duplicate_question_ids():
    question = {
        "id": "Q1",
        "type": "single",
        "pillar": "GOV",
        "options": {"yes": 10.0, "no": 0.0},
        "na": [],
        "weight": 1.0,
    }
    with pytest.raises(ConfigError):
        registry_from_dict({"questions": [question, dict(question)]})


def test_registry_rejects_out_of_range_option_score():
    with pytest.raises(ConfigError):
        registry_from_dict(
            {
                "questions": [
                    {
                        "id": "Q1",
                        "type": "single",
                        "pillar": "GOV",
                        "options": {"yes": 11.0},
                        "na": [],
                        "weight": 1.0,
                    }
                ]
            }
        )


def test_max_multiple_requires_max_choices():
    with pytest.raises(ConfigError):
        registry_from_dict(
            {
                "questions": [
                    {
                        "id": "Q1",
                        "type": "max_multiple",
                        "pillar": "GOV",
                        "options": {"a": 10.0, "b": 0.0},
                        "na": [],
                        "weight": 1.0,
                    }
                ]
            }
        )
