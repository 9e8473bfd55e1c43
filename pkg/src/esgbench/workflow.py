"""Dataset assembly and the split/score/tier/agree engine.

This module owns the shared middle of the workflow: folding cleaned
sheets into per-(country, question) distributions, scoring a whole
dataset, running one baseline/holdout split end to end, and repeating
that over seeds for stability validation and the tier-predictor
comparison.

Scores travel like this for one split: raw indicator scores never
depend on the split; min-max parameters are fitted per group on the
baseline subset and applied with clamping to the holdout ("workflow"
side).  A second, full-information fit over every country produces the
reference scores the workflow side is compared against, since the
synthetic setting has no external expert baseline.  One thresholds
instance per group, derived from the baseline side, classifies both.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol

import numpy as np

from .agreement import (
    AgreementReport,
    ScorePair,
    TierDiffRow,
    agreement_report,
    categorical_metrics,
    per_tier_diff_table,
)
from .baseline import Tier, TierThresholds, assign_tier, tier_thresholds
from .errors import DataError
from .ingest import CleanTable, clean_sheet, iter_sheet_dir
from .ml_baseline import (
    DEFAULT_LAMBDA,
    DEFAULT_MAX_ITER,
    FeatureMatrix,
    train,
    predict,
)
from .rng import SplitMix64  # noqa: F401  (re-exported for callers)
from .scoring import (
    CountryScoreCard,
    PillarWeights,
    ResponseDistribution,
    ScalingParams,
    composite_esg,
    indicator_score,
    minmax_scale_group,
    pillar_score,
    scale_value,
)
from .taxonomy import (
    COMPOSITE_GROUP,
    GROUP_ORDER,
    PILLAR_ORDER,
    QuestionRegistry,
)
from .validation import (
    DEFAULT_FRACTION,
    MetricAggregate,
    MIN_BASELINE,
    RrssvReport,
    SplitPlan,
    aggregate_metrics,
    split_countries,
)

METRIC_NAMES = ("mae", "rmse", "bias", "spearman", "accuracy", "macro_f1", "kappa")


class IngestObserver(Protocol):
    """Instrumentation hooks around raw-sheet lifetimes."""

    def sheet_loaded(self, sheet_id: str) -> None: ...

    def sheet_released(self, sheet_id: str) -> None: ...


@dataclass
class SurveyDataset:
    """Validated distributions for every designated (country, question)."""

    registry: QuestionRegistry
    countries: tuple[str, ...]
    distributions: dict[tuple[str, str], ResponseDistribution]
    skipped_questions: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def question_ids(self) -> list[str]:
        return [
            qid
            for qid in self.registry.questions
            if qid not in self.skipped_questions
        ]


def build_dataset(
    tables: Iterable[CleanTable],
    registry: QuestionRegistry,
    restrict: list[str] | None = None,
) -> SurveyDataset:
    """Fold cleaned sheets into a validated dataset.

    Consumes the iterable lazily, one table at a time.  Every sheet id
    must be a registered question; option labels must be known to the
    question (scored or na); duplicate labels within a sheet add up.
    With a country filter, codes missing from the data are an error, as
    is a question that covers only part of the designated countries.
    """
    freqs: dict[str, dict[str, dict[str, float]]] = {}
    seen_by_question: dict[str, set[str]] = {}
    for table in tables:
        qid = table.sheet_id
        spec = registry.spec(qid)
        known = set(spec.option_scores) | set(spec.na_labels)
        unknown = sorted({c for c in table.criteria if c not in known})
        if unknown:
            raise DataError(
                f"sheet '{qid}': unknown option label(s) "
                f"{', '.join(repr(u) for u in unknown)}"
            )
        if qid in freqs:
            raise DataError(f"sheet '{qid}' appears more than once")
        per_country: dict[str, dict[str, float]] = {c: {} for c in table.countries}
        for label, row in zip(table.criteria, table.values):
            for country, value in zip(table.countries, row):
                acc = per_country[country]
                acc[label] = acc.get(label, 0.0) + value
        freqs[qid] = per_country
        seen_by_question[qid] = set(table.countries)

    if not freqs:
        raise DataError("no sheets ingested")

    all_seen: set[str] = set()
    for codes in seen_by_question.values():
        all_seen |= codes
    if restrict is not None:
        restricted = [c.strip().upper() for c in restrict]
        missing = sorted(set(restricted) - all_seen)
        if missing:
            raise DataError(
                f"unknown country code(s) in country filter: {', '.join(missing)}"
            )
        designated = tuple(sorted(set(restricted)))
    else:
        designated = tuple(sorted(all_seen))

    warnings: list[str] = []
    skipped = tuple(q for q in registry.questions if q not in freqs)
    for q in skipped:
        warnings.append(f"question '{q}' absent from ingested sheets; skipped")

    for qid in freqs:
        absent = sorted(set(designated) - seen_by_question[qid])
        if absent:
            raise DataError(
                f"question '{qid}' has no column for country '{absent[0]}'"
            )

    for pillar in PILLAR_ORDER:
        active = [
            s for s in registry.questions_for(pillar) if s.question_id not in skipped
        ]
        if not active:
            raise DataError(
                f"pillar {pillar.code} has no ingested questions; "
                "composite scores are impossible"
            )

    distributions: dict[tuple[str, str], ResponseDistribution] = {}
    for qid, per_country in freqs.items():
        for country in designated:
            distributions[(country, qid)] = ResponseDistribution(
                country=country, question_id=qid, freqs=per_country[country]
            )

    return SurveyDataset(
        registry=registry,
        countries=designated,
        distributions=distributions,
        skipped_questions=skipped,
        warnings=tuple(warnings),
    )


def dataset_from_dir(
    sheets_dir: str | Path,
    registry: QuestionRegistry,
    restrict: list[str] | None = None,
    observer: IngestObserver | None = None,
) -> SurveyDataset:
    """Ingest a sheet directory batch-wise.

    Raw sheets are read, cleaned, and folded one at a time; at no point
    are two raw sheets resident together.  The optional observer sees
    each sheet's load/release and exists for tests to assert exactly
    that.
    """

    def cleaned() -> Iterable[CleanTable]:
        for raw in iter_sheet_dir(sheets_dir):
            if observer is not None:
                observer.sheet_loaded(raw.sheet_id)
            try:
                table = clean_sheet(raw)
            finally:
                if observer is not None:
                    observer.sheet_released(raw.sheet_id)
            yield table

    return build_dataset(cleaned(), registry, restrict)


@dataclass
class SplitResult:
    """Everything one baseline/holdout split produces."""

    baseline: tuple[str, ...]
    holdout: tuple[str, ...]
    scaling_on: bool
    pillar_weights: PillarWeights
    cards_baseline: dict[str, CountryScoreCard]
    cards_workflow: dict[str, CountryScoreCard]
    cards_reference: dict[str, CountryScoreCard]
    scaling_params: dict[str, ScalingParams]
    reference_params: dict[str, ScalingParams]
    thresholds: dict[str, TierThresholds]


def _raw_scores(
    dataset: SurveyDataset,
) -> dict[str, tuple[dict[str, float], dict]]:
    """Indicator scores and raw pillar means for every country."""
    registry = dataset.registry
    out: dict[str, tuple[dict[str, float], dict]] = {}
    active = dataset.question_ids()
    for country in dataset.countries:
        indicators: dict[str, float] = {}
        for qid in active:
            spec = registry.questions[qid]
            dist = dataset.distributions[(country, qid)]
            indicators[qid] = indicator_score(dist, spec)
        raw: dict = {}
        for pillar in PILLAR_ORDER:
            specs = [
                s
                for s in registry.questions_for(pillar)
                if s.question_id in indicators
            ]
            if not specs:
                raise DataError(
                    f"country {country}: pillar {pillar.code} has no scored "
                    "indicators"
                )
            raw[pillar] = pillar_score(
                [indicators[s.question_id] for s in specs],
                [s.weight for s in specs],
            )
        out[country] = (indicators, raw)
    return out


def _card(
    country: str,
    indicators: dict[str, float],
    raw: dict,
    params: dict[str, ScalingParams] | None,
    clamp: bool,
    weights: PillarWeights,
) -> CountryScoreCard:
    if params is None:
        pillar_scores = dict(raw)
    else:
        pillar_scores = {
            p: scale_value(raw[p], params[p.code], clamp=clamp) for p in PILLAR_ORDER
        }
    card = CountryScoreCard(
        country=country,
        indicator_scores=dict(indicators),
        raw_pillar_scores=dict(raw),
        pillar_scores=pillar_scores,
    )
    card.composite = composite_esg(card.pillar_scores, weights)
    return card


def run_split(
    dataset: SurveyDataset,
    baseline: list[str],
    pillar_weights: PillarWeights | None = None,
    scaling: bool = True,
) -> SplitResult:
    """Score, scale, and tier one baseline/holdout split."""
    if pillar_weights is None:
        pillar_weights = PillarWeights()
    base = tuple(sorted(set(baseline)))
    unknown = sorted(set(base) - set(dataset.countries))
    if unknown:
        raise DataError(
            f"baseline countries not in dataset: {', '.join(unknown)}"
        )
    if len(base) < MIN_BASELINE:
        raise DataError(
            f"baseline needs at least {MIN_BASELINE} countries, got {len(base)}"
        )
    holdout = tuple(c for c in dataset.countries if c not in set(base))
    if not holdout:
        raise DataError("split leaves no holdout countries")

    raw_all = _raw_scores(dataset)

    scaling_params: dict[str, ScalingParams] = {}
    reference_params: dict[str, ScalingParams] = {}
    if scaling:
        for pillar in PILLAR_ORDER:
            base_raw = {c: raw_all[c][1][pillar] for c in base}
            _, params = minmax_scale_group(base_raw, pillar.code)
            scaling_params[pillar.code] = params
            full_raw = {c: raw_all[c][1][pillar] for c in dataset.countries}
            _, ref = minmax_scale_group(full_raw, pillar.code)
            reference_params[pillar.code] = ref

    params_or_none = scaling_params if scaling else None
    ref_or_none = reference_params if scaling else None
    cards_baseline = {
        c: _card(c, *raw_all[c], params_or_none, False, pillar_weights) for c in base
    }
    cards_workflow = {
        c: _card(c, *raw_all[c], params_or_none, True, pillar_weights)
        for c in holdout
    }
    cards_reference = {
        c: _card(c, *raw_all[c], ref_or_none, True, pillar_weights) for c in holdout
    }

    thresholds: dict[str, TierThresholds] = {}
    for pillar in PILLAR_ORDER:
        sample = [cards_baseline[c].pillar_scores[pillar] for c in base]
        thresholds[pillar.code] = tier_thresholds(sample, pillar.code)
    thresholds[COMPOSITE_GROUP] = tier_thresholds(
        [cards_baseline[c].composite for c in base], COMPOSITE_GROUP
    )

    for cards in (cards_baseline, cards_workflow, cards_reference):
        for card in cards.values():
            for pillar in PILLAR_ORDER:
                card.tiers[pillar] = assign_tier(
                    card.pillar_scores[pillar], thresholds[pillar.code]
                )
            card.composite_tier = assign_tier(
                card.composite, thresholds[COMPOSITE_GROUP]
            )

    return SplitResult(
        baseline=base,
        holdout=holdout,
        scaling_on=scaling,
        pillar_weights=pillar_weights,
        cards_baseline=cards_baseline,
        cards_workflow=cards_workflow,
        cards_reference=cards_reference,
        scaling_params=scaling_params,
        reference_params=reference_params,
        thresholds=thresholds,
    )


def _axis_values(card: CountryScoreCard, group: str) -> tuple[float, Tier]:
    if group == COMPOSITE_GROUP:
        return card.composite, card.composite_tier
    pillar = next(p for p in PILLAR_ORDER if p.code == group)
    return card.pillar_scores[pillar], card.tiers[pillar]


def agreement_reports(result: SplitResult) -> list[AgreementReport]:
    """Reference-vs-workflow agreement on every group axis, holdout only."""
    reports = []
    for group in GROUP_ORDER:
        pairs = []
        tiers_ref: list[Tier] = []
        tiers_wf: list[Tier] = []
        for country in result.holdout:
            ref_score, ref_tier = _axis_values(result.cards_reference[country], group)
            wf_score, wf_tier = _axis_values(result.cards_workflow[country], group)
            pairs.append(
                ScorePair(country=country, baseline=ref_score, workflow=wf_score)
            )
            tiers_ref.append(ref_tier)
            tiers_wf.append(wf_tier)
        reports.append(
            agreement_report(
                group, pairs, tiers_ref, tiers_wf, result.thresholds[group]
            )
        )
    return reports


def tier_diff_rows(result: SplitResult) -> list[TierDiffRow]:
    """The overlay table: baseline cards vs workflow cards, per tier."""
    baseline_side = {
        group: [
            _axis_values(result.cards_baseline[c], group) for c in result.baseline
        ]
        for group in GROUP_ORDER
    }
    workflow_side = {
        group: [
            _axis_values(result.cards_workflow[c], group) for c in result.holdout
        ]
        for group in GROUP_ORDER
    }
    return per_tier_diff_table(baseline_side, workflow_side)


def split_metrics(result: SplitResult) -> dict[str, float]:
    """Flat metric map (group_metric keys) for cross-seed aggregation."""
    out: dict[str, float] = {}
    for report in agreement_reports(result):
        g = report.group.lower()
        out[f"{g}_mae"] = report.mae
        out[f"{g}_rmse"] = report.rmse
        out[f"{g}_bias"] = report.bias
        out[f"{g}_spearman"] = report.spearman_rho
        out[f"{g}_accuracy"] = report.accuracy
        out[f"{g}_macro_f1"] = report.macro_f1
        out[f"{g}_kappa"] = report.cohen_kappa
    return out


def _map_seeds(
    fn: Callable[[SplitPlan], dict[str, float]],
    plans: list[SplitPlan],
    threads: int,
) -> list[dict[str, float]]:
    if threads <= 1:
        return [fn(plan) for plan in plans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, plans))


def run_rrssv(
    dataset: SurveyDataset,
    seeds: list[int],
    fraction: float = DEFAULT_FRACTION,
    pillar_weights: PillarWeights | None = None,
    scaling: bool = True,
    threads: int = 1,
) -> RrssvReport:
    """Repeated random sub-sampling over the given seeds.

    Per seed: split, refit scaling and thresholds on the baseline side,
    score and tier the holdout, and collect the agreement metrics.
    Results are aggregated as mean and n-1 std per metric; identical
    seed lists always reproduce identical numbers, regardless of the
    thread count.
    """
    if len(seeds) < 2:
        raise DataError(
            f"stability validation needs at least 2 seeds, got {len(seeds)}"
        )
    plans = [split_countries(list(dataset.countries), s, fraction) for s in seeds]

    def one(plan: SplitPlan) -> dict[str, float]:
        result = run_split(
            dataset, list(plan.baseline), pillar_weights, scaling=scaling
        )
        return split_metrics(result)

    per_seed = _map_seeds(one, plans, threads)
    return RrssvReport(
        seeds=tuple(seeds),
        fraction=fraction,
        n_countries=len(dataset.countries),
        baseline_size=len(plans[0].baseline),
        metrics=aggregate_metrics(per_seed),
        plans=tuple(plans),
    )


@dataclass
class MlReport:
    """Cross-seed summary of the tier predictor against induced labels."""

    seeds: tuple[int, ...]
    fraction: float
    lam: float
    widened: bool
    max_iter: int
    metrics: dict[str, MetricAggregate]
    all_converged: bool
    flags: tuple[str, ...] = ()


def _feature_rows(
    dataset: SurveyDataset,
    raw_all: dict,
    countries: tuple[str, ...],
    result: SplitResult,
    columns: list[str],
    pillars,
    use_workflow_cards: bool,
) -> FeatureMatrix:
    rows = []
    labels = []
    values = []
    cards = result.cards_workflow if use_workflow_cards else result.cards_baseline
    for country in countries:
        indicators = raw_all[country][0]
        for pillar in pillars:
            rows.append((country, pillar.code))
            labels.append(cards[country].tiers[pillar])
            values.append([indicators.get(q, np.nan) for q in columns])
    return FeatureMatrix(
        rows=rows, columns=columns, values=np.asarray(values), labels=labels
    )


def evaluate_tier_model(
    dataset: SurveyDataset,
    seeds: list[int],
    fraction: float = DEFAULT_FRACTION,
    lam: float = DEFAULT_LAMBDA,
    widen: bool = False,
    max_iter: int = DEFAULT_MAX_ITER,
    pillar_weights: PillarWeights | None = None,
    scaling: bool = True,
    threads: int = 1,
) -> MlReport:
    """Train/evaluate the tier predictor over repeated splits.

    Labels are the tiers induced by each seed's baseline quartiles;
    features are the question-level indicator scores.  Default scope is
    pillar-restricted (one model per pillar on its own questions);
    widen=True trains a single model over every question column, which
    gives all four rows of a country identical features.
    """
    if len(seeds) < 2:
        raise DataError(
            f"model evaluation needs at least 2 seeds, got {len(seeds)}"
        )
    raw_all = _raw_scores(dataset)
    plans = [split_countries(list(dataset.countries), s, fraction) for s in seeds]
    registry = dataset.registry
    flags: set[str] = set()
    converged = [True]

    def one(plan: SplitPlan) -> dict[str, float]:
        result = run_split(
            dataset, list(plan.baseline), pillar_weights, scaling=scaling
        )
        true_labels: list[Tier] = []
        pred_labels: list[Tier] = []
        if widen:
            scopes = [(list(PILLAR_ORDER), dataset.question_ids())]
        else:
            scopes = [
                (
                    [pillar],
                    [
                        s.question_id
                        for s in registry.questions_for(pillar)
                        if s.question_id in set(dataset.question_ids())
                    ],
                )
                for pillar in PILLAR_ORDER
            ]
        for pillars, columns in scopes:
            train_m = _feature_rows(
                dataset, raw_all, result.baseline, result, columns, pillars, False
            )
            test_m = _feature_rows(
                dataset, raw_all, result.holdout, result, columns, pillars, True
            )
            model = train(train_m, lam=lam, max_iter=max_iter)
            if not model.converged:
                converged[0] = False
                flags.add(
                    f"seed {plan.seed}: training hit the iteration cap "
                    f"({max_iter}) before the gradient tolerance"
                )
            for f in model.flags:
                flags.add(f"seed {plan.seed}: {f}")
            preds = predict(model, test_m.values)
            true_labels.extend(test_m.labels)
            pred_labels.extend(preds)
        cats = categorical_metrics(true_labels, pred_labels)
        return {"accuracy": cats.accuracy, "macro_f1": cats.macro_f1}

    per_seed = _map_seeds(one, plans, threads)
    return MlReport(
        seeds=tuple(seeds),
        fraction=fraction,
        lam=lam,
        widened=widen,
        max_iter=max_iter,
        metrics=aggregate_metrics(per_seed),
        all_converged=converged[0],
        flags=tuple(sorted(flags)),
    )
