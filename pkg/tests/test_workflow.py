from __future__ import annotations

import math

import pytest

from esgbench.baseline import Tier, assign_tier, tier_thresholds
from esgbench.errors import DataError
from esgbench.ingest import CleanTable
from esgbench.scoring import PillarWeights
from esgbench.taxonomy import GROUP_ORDER, Pillar, registry_from_dict
from esgbench.validation import split_countries
from esgbench.workflow import (
    agreement_reports,
    build_dataset,
    dataset_from_dir,
    evaluate_tier_model,
    run_rrssv,
    run_split,
    split_metrics,
    tier_diff_rows,
)

from conftest import tiny_dataset, tiny_registry, tiny_tables

METRIC_SUFFIXES = ("mae", "rmse", "bias", "spearman", "accuracy", "macro_f1", "kappa")


def test_build_dataset_collects_all_questions_and_countries():
    countries = [f"C{i:02d}" for i in range(8)]
    registry = tiny_registry()
    dataset = build_dataset(tiny_tables(countries, registry), registry)
    assert dataset.countries == tuple(countries)
    assert dataset.question_ids() == ["TG1", "TE1", "TB1", "TC1"]
    assert set(dataset.distributions) == {
        (c, q) for c in countries for q in dataset.question_ids()
    }
    assert dataset.warnings == ()


def test_build_dataset_rejects_unknown_option_label():
    countries = ["C00", "C01"]
    registry = tiny_registry()
    tables = tiny_tables(countries, registry)
    bad = CleanTable(
        sheet_id="TG1",
        criteria=["yes", "sometimes"],
        countries=countries,
        values=[[1.0, 2.0], [3.0, 4.0]],
    )
    with pytest.raises(DataError) as excinfo:
        build_dataset([bad] + tables[1:], registry)
    assert "'sometimes'" in str(excinfo.value)


def test_build_dataset_rejects_duplicate_sheet():
    countries = ["C00", "C01"]
    registry = tiny_registry()
    tables = tiny_tables(countries, registry)
    with pytest.raises(DataError) as excinfo:
        build_dataset(tables + [tables[0]], registry)
    assert "more than once" in str(excinfo.value)


def test_build_dataset_rejects_empty_input():
    with pytest.raises(DataError):
        build_dataset([], tiny_registry())


def test_build_dataset_rejects_unknown_restrict_code():
    countries = ["C00", "C01", "C02"]
    registry = tiny_registry()
    with pytest.raises(DataError) as excinfo:
        build_dataset(tiny_tables(countries, registry), registry, restrict=["C00", "ZZ"])
    assert "ZZ" in str(excinfo.value)


def test_build_dataset_restrict_narrows_and_normalizes():
    countries = ["C00", "C01", "C02", "C03"]
    registry = tiny_registry()
    dataset = build_dataset(
        tiny_tables(countries, registry), registry, restrict=[" c02 ", "C00"]
    )
    assert dataset.countries == ("C00", "C02")


def test_build_dataset_rejects_partial_country_coverage():
    registry = tiny_registry()
    tables = tiny_tables(["C00", "C01"], registry)
    narrow = CleanTable(
        sheet_id=tables[0].sheet_id,
        criteria=list(tables[0].criteria),
        countries=["C00"],
        values=[row[:1] for row in tables[0].values],
    )
    with pytest.raises(DataError) as excinfo:
        build_dataset([narrow] + tables[1:], registry)
    assert "no column for country" in str(excinfo.value)


def test_build_dataset_warns_about_skipped_questions():
    registry = registry_from_dict(
        {
            "questions": [
                {
                    "id": qid,
                    "type": "single",
                    "pillar": pillar,
                    "options": {"yes": 10.0, "no": 0.0},
                    "na": [],
                    "weight": 1.0,
                }
                for qid, pillar in (
                    ("TG1", "GOV"),
                    ("TG2", "GOV"),
                    ("TE1", "ENE"),
                    ("TB1", "BIO"),
                    ("TC1", "CLI"),
                )
            ]
        }
    )
    countries = ["C00", "C01"]
    tables = [
        CleanTable(
            sheet_id=qid,
            criteria=["yes", "no"],
            countries=countries,
            values=[[2.0, 3.0], [1.0, 4.0]],
        )
        for qid in ("TG1", "TE1", "TB1", "TC1")
    ]
    dataset = build_dataset(tables, registry)
    assert dataset.skipped_questions == ("TG2",)
    assert any("TG2" in w for w in dataset.warnings)


def test_build_dataset_rejects_uncovered_pillar():
    registry = tiny_registry()
    tables = tiny_tables(["C00", "C01"], registry)
    with pytest.raises(DataError) as excinfo:
        build_dataset([t for t in tables if t.sheet_id != "TC1"], registry)
    assert "CLI" in str(excinfo.value)


class _Ledger:
    def __init__(self):
        self.resident = 0
        self.max_resident = 0
        self.events = []

    def sheet_loaded(self, sheet_id):
        self.resident += 1
        self.max_resident = max(self.max_resident, self.resident)
        self.events.append(("load", sheet_id))

    def sheet_released(self, sheet_id):
        self.resident -= 1
        self.events.append(("release", sheet_id))


def test_dataset_from_dir_holds_one_sheet_at_a_time(fixture_dir):
    from esgbench.taxonomy import load_registry

    registry = load_registry(fixture_dir / "registry.json")
    ledger = _Ledger()
    dataset = dataset_from_dir(fixture_dir / "sheets", registry, observer=ledger)
    assert len(dataset.countries) == 50
    assert ledger.max_resident == 1
    assert ledger.resident == 0
    assert len(ledger.events) == 2 * len(dataset.question_ids())


def test_run_split_validates_baseline_membership():
    dataset = tiny_dataset(12)
    with pytest.raises(DataError) as excinfo:
        run_split(dataset, ["C00", "C01", "C02", "ZZ"])
    assert "ZZ" in str(excinfo.value)


def test_run_split_needs_four_baseline_countries():
    dataset = tiny_dataset(12)
    with pytest.raises(DataError):
        run_split(dataset, ["C00", "C01", "C02"])


def test_run_split_needs_a_holdout():
    dataset = tiny_dataset(12)
    with pytest.raises(DataError):
        run_split(dataset, list(dataset.countries))


def test_run_split_partitions_cards_and_thresholds():
    dataset = tiny_dataset(12)
    baseline = list(dataset.countries[:5])
    result = run_split(dataset, baseline)
    assert result.baseline == tuple(sorted(baseline))
    assert set(result.cards_baseline) == set(result.baseline)
    assert set(result.cards_workflow) == set(result.holdout)
    assert set(result.cards_reference) == set(result.holdout)
    assert set(result.thresholds) == set(GROUP_ORDER)
    assert set(result.scaling_params) == {p.code for p in Pillar}


def test_run_split_thresholds_are_baseline_quartiles():
    dataset = tiny_dataset(12)
    result = run_split(dataset, list(dataset.countries[:6]))
    sample = [result.cards_baseline[c].composite for c in result.baseline]
    assert result.thresholds["ESG"] == tier_thresholds(sample, "ESG")


def test_run_split_tiers_follow_thresholds():
    dataset = tiny_dataset(12)
    result = run_split(dataset, list(dataset.countries[:6]))
    for card in list(result.cards_baseline.values()) + list(
        result.cards_workflow.values()
    ):
        for pillar in Pillar:
            want = assign_tier(
                card.pillar_scores[pillar], result.thresholds[pillar.code]
            )
            assert card.tiers[pillar] == want
        assert card.composite_tier == assign_tier(
            card.composite, result.thresholds["ESG"]
        )


def test_run_split_scaling_off_keeps_raw_scores():
    dataset = tiny_dataset(12)
    result = run_split(dataset, list(dataset.countries[:5]), scaling=False)
    assert result.scaling_params == {}
    assert result.reference_params == {}
    for card in result.cards_baseline.values():
        for pillar in Pillar:
            assert card.pillar_scores[pillar] == card.raw_pillar_scores[pillar]


def test_run_split_custom_weights_change_composite():
    dataset = tiny_dataset(12)
    heavy_gov = PillarWeights(
        {Pillar.GOV: 0.7, Pillar.ENE: 0.1, Pillar.BIO: 0.1, Pillar.CLI: 0.1}
    )
    default = run_split(dataset, list(dataset.countries[:5]))
    skewed = run_split(dataset, list(dataset.countries[:5]), pillar_weights=heavy_gov)
    diffs = [
        abs(default.cards_baseline[c].composite - skewed.cards_baseline[c].composite)
        for c in default.baseline
    ]
    assert max(diffs) > 1e-9


def test_agreement_reports_cover_groups_in_order():
    dataset = tiny_dataset(12)
    result = run_split(dataset, list(dataset.countries[:5]))
    reports = agreement_reports(result)
    assert [r.group for r in reports] == list(GROUP_ORDER)
    for report in reports:
        assert report.n_pairs == len(result.holdout)
        assert report.thresholds_digest == result.thresholds[report.group].digest()
        assert math.isfinite(report.mae)


def test_split_metrics_is_flat_and_group_major():
    dataset = tiny_dataset(12)
    metrics = split_metrics(run_split(dataset, list(dataset.countries[:5])))
    want = [
        f"{g.lower()}_{suffix}" for g in GROUP_ORDER for suffix in METRIC_SUFFIXES
    ]
    assert list(metrics) == want
    assert len(metrics) == 35


def test_tier_diff_rows_only_for_occupied_tiers():
    dataset = tiny_dataset(12)
    result = run_split(dataset, list(dataset.countries[:5]))
    rows = tier_diff_rows(result)
    assert rows
    groups = {row.group for row in rows}
    assert groups <= set(GROUP_ORDER)
    for row in rows:
        if row.baseline_mean is not None and row.workflow_mean is not None:
            assert row.diff == pytest.approx(
                row.workflow_mean - row.baseline_mean, abs=1e-12
            )
        else:
            assert row.diff is None
        assert row.baseline_mean is not None or row.workflow_mean is not None


def test_run_rrssv_matches_a_manual_seed_loop():
    dataset = tiny_dataset(12)
    seeds = [0, 1, 2, 3]
    report = run_rrssv(dataset, seeds)
    manual = []
    for seed in seeds:
        plan = split_countries(list(dataset.countries), seed)
        manual.append(split_metrics(run_split(dataset, list(plan.baseline))))
    for name, agg in report.metrics.items():
        values = [row[name] for row in manual]
        assert agg.per_seed == tuple(values)
        assert agg.mean == sum(values) / len(values)
    assert report.n_countries == 12
    assert report.baseline_size == len(report.plans[0].baseline)


def test_run_rrssv_is_thread_invariant():
    dataset = tiny_dataset(12)
    seeds = [5, 6, 7, 8, 9]
    single = run_rrssv(dataset, seeds, threads=1)
    multi = run_rrssv(dataset, seeds, threads=4)
    assert single.metrics == multi.metrics
    assert single.plans == multi.plans


def test_run_rrssv_replays_identically():
    dataset = tiny_dataset(12)
    a = run_rrssv(dataset, [0, 1, 2])
    b = run_rrssv(dataset, [0, 1, 2])
    assert a == b


def test_run_rrssv_needs_two_seeds():
    dataset = tiny_dataset(12)
    with pytest.raises(DataError):
        run_rrssv(dataset, [0])


def test_evaluate_tier_model_reports_and_replays():
    dataset = tiny_dataset(12)
    report = evaluate_tier_model(dataset, [0, 1], max_iter=300)
    assert set(report.metrics) == {"accuracy", "macro_f1"}
    acc = report.metrics["accuracy"]
    assert 0.0 <= acc.mean <= 1.0
    again = evaluate_tier_model(dataset, [0, 1], max_iter=300)
    assert report.metrics == again.metrics
    assert report.flags == again.flags


def test_evaluate_tier_model_thread_invariant():
    dataset = tiny_dataset(12)
    single = evaluate_tier_model(dataset, [0, 1, 2], max_iter=200, threads=1)
    multi = evaluate_tier_model(dataset, [0, 1, 2], max_iter=200, threads=3)
    assert single.metrics == multi.metrics


def test_evaluate_tier_model_widen_uses_all_columns():
    dataset = tiny_dataset(12)
    narrow = evaluate_tier_model(dataset, [0, 1], max_iter=200)
    wide = evaluate_tier_model(dataset, [0, 1], max_iter=200, widen=True)
    assert narrow.widened is False
    assert wide.widened is True
    assert wide.seeds == (0, 1)


def test_evaluate_tier_model_needs_two_seeds():
    dataset = tiny_dataset(12)
    with pytest.raises(DataError):
        evaluate_tier_model(dataset, [7])
