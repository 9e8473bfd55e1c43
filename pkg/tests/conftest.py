from __future__ import annotations

from pathlib import Path

import pytest

from esgbench.ingest import CleanTable
from esgbench.taxonomy import registry_from_dict
from esgbench.workflow import build_dataset

REPO = Path(__file__).resolve().parents[1]
FIXTURE = REPO / "data" / "fixture"
GOLDEN = REPO / "tests" / "golden" / "run"
NORMALITY = REPO / "tests" / "data" / "normality"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture(scope="session")
def normality_dir() -> Path:
    return NORMALITY


def tiny_registry():
    """One single-choice question per pillar, yes/partial/no scored 10/5/0."""
    questions = []
    for qid, pillar in (
        ("TG1", "GOV"),
        ("TE1", "ENE"),
        ("TB1", "BIO"),
        ("TC1", "CLI"),
    ):
        questions.append(
            {
                "id": qid,
                "type": "single",
                "pillar": pillar,
                "options": {"yes": 10.0, "partial": 5.0, "no": 0.0},
                "na": ["dk/na"],
                "weight": 1.0,
            }
        )
    return registry_from_dict({"questions": questions})


def tiny_tables(countries: list[str], registry=None):
    """Deterministic response counts: country i leans more positive with i."""
    registry = registry or tiny_registry()
    tables = []
    for offset, qid in enumerate(registry.questions):
        criteria = ["yes", "partial", "no", "dk/na"]
        values = []
        for label_idx in range(4):
            row = []
            for i, _ in enumerate(countries):
                base = (i * 7 + offset * 3 + label_idx * 5) % 11
                row.append(float(base + (3 if label_idx == 0 and i % 3 == 0 else 1)))
            values.append(row)
        tables.append(
            CleanTable(
                sheet_id=qid,
                criteria=criteria,
                countries=list(countries),
                values=values,
            )
        )
    return tables


def tiny_dataset(n_countries: int = 12):
    countries = [f"C{i:02d}" for i in range(n_countries)]
    registry = tiny_registry()
    return build_dataset(tiny_tables(countries, registry), registry)
