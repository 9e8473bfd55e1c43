"""End-to-end run orchestration: config, stages, and report emission.

A run is configured by one INI file and produces a fixed set of report
files.  The emission formats are a byte-level contract, shared with an
independently written reference generator:

* CSV: comma separated, "\n" line endings, one header row; floats
  render with format .3f except the four normality fields, which use
  .4f; missing values are empty cells; booleans are true/false; flag
  lists join with "; ".
* JSON: floats rounded to 12 decimal places (normality fields to 4
  first), then json.dumps(sort_keys=True, indent=2, ensure_ascii=False)
  with a trailing newline.  recommendations.jsonl holds one compact
  sorted-keys object per line.
* run_manifest.json and the histogram PNGs are reproducible but carry
  run-local data (timings, library-versioned rendering), so they sit
  outside the byte contract.

Config sections and keys are validated strictly: an unknown section or
key is a configuration error, not a silent no-op.  All paths are
resolved relative to the INI file's directory.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import logging
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import __version__
from .agreement import AgreementReport, TierDiffRow, krippendorff_alpha
from .baseline import (
    NormalityResult,
    dagostino_pearson,
    describe,
    shapiro_wilk,
)
from .errors import ConfigError, DataError, EsgbenchError
from .ingest import CleanTable, clean_sheet, iter_sheet_dir
from .llm import HttpChatClient, LlmClient, StubClient
from .ml_baseline import DEFAULT_LAMBDA, DEFAULT_MAX_ITER
from .recommend import (
    FlagPolicy,
    RecommendationRecord,
    RubricScores,
    generate,
    record_rubric,
    select_flagged,
)
from .scoring import PillarWeights
from .taxonomy import COMPOSITE_GROUP, GROUP_ORDER, PILLAR_ORDER, load_registry
from .validation import DEFAULT_FRACTION, RrssvReport, split_countries
from .workflow import (
    MlReport,
    SplitResult,
    SurveyDataset,
    agreement_reports,
    build_dataset,
    evaluate_tier_model,
    run_rrssv,
    run_split,
    split_metrics,
    tier_diff_rows,
)

LOGGER = logging.getLogger(__name__)

GROUP_DISPLAY = {p.code: p.display for p in PILLAR_ORDER} | {
    COMPOSITE_GROUP: "ESG composite"
}

_KNOWN_KEYS = {
    "input": {"sheets_dir", "registry", "countries"},
    "scoring": {"scaling", "weights"},
    "split": {"baseline_countries", "seed", "fraction"},
    "validate": {"enabled", "seeds", "fraction", "threads"},
    "ml": {"enabled", "lambda", "widen", "max_iter", "seeds", "fraction"},
    "recommend": {
        "enabled",
        "client",
        "model",
        "axis",
        "policy",
        "threshold",
        "template",
        "ratings",
        "endpoint",
        "credential_env",
    },
    "output": {"dir"},
}


@dataclass
class PipelineConfig:
    """Resolved run configuration; every path is absolute."""

    config_path: Path
    sheets_dir: Path
    registry_path: Path
    countries: list[str] | None
    scaling: bool
    weights: PillarWeights
    baseline_countries: list[str] | None
    split_seed: int | None
    split_fraction: float | None
    validate_enabled: bool
    validate_seeds: list[int]
    validate_fraction: float
    threads: int
    ml_enabled: bool
    ml_lambda: float
    ml_widen: bool
    ml_max_iter: int
    ml_seeds: list[int]
    ml_fraction: float
    rec_enabled: bool
    rec_client: str
    rec_model: str
    rec_axis: str
    rec_policy: FlagPolicy
    rec_template_path: Path | None
    ratings_path: Path | None
    endpoint: str
    credential_env: str
    output_dir: Path


def _parse_ints(text: str, label: str) -> list[int]:
    try:
        return [int(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"{label} must be a comma list of integers: {text!r}") from None


def _parse_bool(cp: configparser.ConfigParser, section: str, key: str, default: bool) -> bool:
    try:
        return cp.getboolean(section, key, fallback=default)
    except ValueError:
        raise ConfigError(
            f"[{section}] {key} must be a boolean, got {cp.get(section, key)!r}"
        ) from None


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a run INI file."""
    path = Path(path).resolve()
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"config file {path} is not valid INI: {exc}") from None

    for section in cp.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(cp[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ConfigError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}"
            )
    for required in ("input", "split", "output"):
        if required not in cp:
            raise ConfigError(f"config section [{required}] is required")

    base = path.parent

    def respath(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else (base / p)

    if "sheets_dir" not in cp["input"] or "registry" not in cp["input"]:
        raise ConfigError("[input] needs both sheets_dir and registry")
    sheets_dir = respath(cp["input"]["sheets_dir"])
    registry_path = respath(cp["input"]["registry"])
    countries_text = cp["input"].get("countries", "").strip()
    countries = (
        [c.strip().upper() for c in countries_text.split(",") if c.strip()]
        if countries_text
        else None
    )

    scaling = _parse_bool(cp, "scoring", "scaling", True)
    weights_text = cp.get("scoring", "weights", fallback="")
    if weights_text.strip():
        parts = [p.strip() for p in weights_text.split(",")]
        if len(parts) != 4:
            raise ConfigError(
                f"[scoring] weights needs 4 comma-separated numbers, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"[scoring] weights are not numeric: {weights_text!r}") from None
        try:
            weights = PillarWeights(dict(zip(PILLAR_ORDER, values)))
        except DataError as exc:
            raise ConfigError(f"[scoring] weights: {exc}") from None
    else:
        weights = PillarWeights()

    split = cp["split"]
    base_text = split.get("baseline_countries", "").strip()
    baseline = (
        [c.strip().upper() for c in base_text.split(",") if c.strip()]
        if base_text
        else None
    )
    seed = int(split["seed"]) if "seed" in split else None
    fraction = float(split["fraction"]) if "fraction" in split else None
    if baseline is not None and seed is not None:
        raise ConfigError(
            "[split] gives both baseline_countries and seed; pick one mechanism"
        )
    if baseline is None and seed is None:
        raise ConfigError(
            "[split] needs baseline_countries or a seed (with optional fraction)"
        )

    validate_enabled = _parse_bool(cp, "validate", "enabled", False)
    validate_seeds = _parse_ints(
        cp.get("validate", "seeds", fallback=""), "[validate] seeds"
    )
    validate_fraction = float(cp.get("validate", "fraction", fallback=DEFAULT_FRACTION))
    threads = int(cp.get("validate", "threads", fallback="1"))
    if threads < 1:
        raise ConfigError(f"[validate] threads must be >= 1, got {threads}")
    if validate_enabled and len(validate_seeds) < 2:
        raise ConfigError("[validate] needs at least 2 seeds when enabled")

    ml_enabled = _parse_bool(cp, "ml", "enabled", False)
    ml_lambda = float(cp.get("ml", "lambda", fallback=DEFAULT_LAMBDA))
    ml_widen = _parse_bool(cp, "ml", "widen", False)
    ml_max_iter = int(cp.get("ml", "max_iter", fallback=DEFAULT_MAX_ITER))
    ml_seeds = _parse_ints(cp.get("ml", "seeds", fallback=""), "[ml] seeds")
    ml_fraction = float(cp.get("ml", "fraction", fallback=DEFAULT_FRACTION))
    if ml_enabled and len(ml_seeds) < 2:
        raise ConfigError("[ml] needs at least 2 seeds when enabled")

    rec_enabled = _parse_bool(cp, "recommend", "enabled", False)
    rec_client = cp.get("recommend", "client", fallback="stub").strip()
    if rec_client not in ("stub", "http"):
        raise ConfigError(
            f"[recommend] client must be 'stub' or 'http', got {rec_client!r}"
        )
    rec_model = cp.get("recommend", "model", fallback="stub-model").strip()
    rec_axis = cp.get("recommend", "axis", fallback=COMPOSITE_GROUP).strip().upper()
    if rec_axis not in GROUP_ORDER:
        raise ConfigError(
            f"[recommend] axis must be one of {', '.join(GROUP_ORDER)}, got {rec_axis!r}"
        )
    policy_mode = cp.get("recommend", "policy", fallback="tier").strip()
    if policy_mode not in ("tier", "threshold"):
        raise ConfigError(
            f"[recommend] policy must be 'tier' or 'threshold', got {policy_mode!r}"
        )
    threshold = float(cp.get("recommend", "threshold", fallback="4.0"))
    rec_policy = FlagPolicy(mode=policy_mode, threshold=threshold)
    template_text = cp.get("recommend", "template", fallback="").strip()
    rec_template_path = respath(template_text) if template_text else None
    ratings_text = cp.get("recommend", "ratings", fallback="").strip()
    ratings_path = respath(ratings_text) if ratings_text else None
    endpoint = cp.get("recommend", "endpoint", fallback="").strip()
    credential_env = cp.get("recommend", "credential_env", fallback="").strip()
    if rec_enabled and rec_client == "http":
        if not endpoint:
            raise ConfigError("[recommend] client=http needs an endpoint")
        if not credential_env:
            raise ConfigError("[recommend] client=http needs credential_env")

    if "dir" not in cp["output"]:
        raise ConfigError("[output] needs dir")
    output_dir = respath(cp["output"]["dir"])

    return PipelineConfig(
        config_path=path,
        sheets_dir=sheets_dir,
        registry_path=registry_path,
        countries=countries,
        scaling=scaling,
        weights=weights,
        baseline_countries=baseline,
        split_seed=seed,
        split_fraction=fraction,
        validate_enabled=validate_enabled,
        validate_seeds=validate_seeds,
        validate_fraction=validate_fraction,
        threads=threads,
        ml_enabled=ml_enabled,
        ml_lambda=ml_lambda,
        ml_widen=ml_widen,
        ml_max_iter=ml_max_iter,
        ml_seeds=ml_seeds,
        ml_fraction=ml_fraction,
        rec_enabled=rec_enabled,
        rec_client=rec_client,
        rec_model=rec_model,
        rec_axis=rec_axis,
        rec_policy=rec_policy,
        rec_template_path=rec_template_path,
        ratings_path=ratings_path,
        endpoint=endpoint,
        credential_env=credential_env,
        output_dir=output_dir,
    )


# ---------------------------------------------------------------------
# Emission helpers (the byte contract).


def _fmt3(x: float | None) -> str:
    return "" if x is None else f"{x:.3f}"


def _fmt4(x: float | None) -> str:
    return "" if x is None else f"{x:.4f}"


def _round12(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round(obj, 12)
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _dump_json(path: Path, obj) -> None:
    text = json.dumps(_round12(obj), sort_keys=True, indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list, rows: Iterable[list]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------
# Result container and stages.


@dataclass
class PipelineResult:
    config: PipelineConfig
    dataset: SurveyDataset
    split: SplitResult
    reports: list[AgreementReport]
    diffs: list[TierDiffRow]
    stats: dict
    rrssv: RrssvReport | None = None
    ml: MlReport | None = None
    recommendations: list[RecommendationRecord] | None = None
    rubric_alpha: dict | None = None
    written: list[Path] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


class _Stage:
    """Times a stage and names it in any workflow error raised inside."""

    def __init__(self, timings: dict, name: str) -> None:
        self.timings = timings
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        LOGGER.info("stage %s: start", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        self.timings[self.name] = elapsed
        if exc is not None and isinstance(exc, EsgbenchError):
            exc.args = (f"[{self.name}] {exc}",)
        LOGGER.info("stage %s: %.3fs", self.name, elapsed)
        return False


def _axis_entries(split: SplitResult, group: str) -> list[tuple[str, float, object]]:
    entries = []
    for country in split.holdout:
        card = split.cards_workflow[country]
        if group == COMPOSITE_GROUP:
            entries.append((country, card.composite, card.composite_tier))
        else:
            pillar = next(p for p in PILLAR_ORDER if p.code == group)
            entries.append((country, card.pillar_scores[pillar], card.tiers[pillar]))
    return entries


def _load_ratings(path: Path) -> list[RubricScores]:
    if not path.is_file():
        raise DataError(f"ratings file not found: {path}")
    rows: list[RubricScores] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"rater", "item", "relevance", "actionability", "faithfulness"}
        if reader.fieldnames is None or not needed <= set(reader.fieldnames):
            raise DataError(
                f"ratings file {path.name} needs columns: {', '.join(sorted(needed))}"
            )

        def cell(row: dict, key: str) -> int | None:
            text = (row[key] or "").strip()
            if not text:
                return None
            try:
                return int(text)
            except ValueError:
                raise DataError(
                    f"ratings file {path.name}: non-integer {key} value {text!r}"
                ) from None

        for row in reader:
            rows.append(
                RubricScores(
                    rater=row["rater"].strip(),
                    item=row["item"].strip(),
                    relevance=cell(row, "relevance"),
                    actionability=cell(row, "actionability"),
                    faithfulness=cell(row, "faithfulness"),
                )
            )
    if not rows:
        raise DataError(f"ratings file {path.name} has no rating rows")
    return rows


def _build_client(config: PipelineConfig) -> LlmClient:
    if config.rec_client == "stub":
        return StubClient(model_id=config.rec_model)
    if not config.endpoint or not config.credential_env:
        raise ConfigError(
            "[recommend] client=http needs both endpoint and credential_env"
        )
    return HttpChatClient(
        endpoint=config.endpoint,
        model_id=config.rec_model,
        credential_env=config.credential_env,
    )


def _group_values(split: SplitResult, cards: dict, group: str):
    if group == COMPOSITE_GROUP:
        return {c: (card.composite, card.composite_tier) for c, card in cards.items()}
    pillar = next(p for p in PILLAR_ORDER if p.code == group)
    return {
        c: (card.pillar_scores[pillar], card.tiers[pillar])
        for c, card in cards.items()
    }


ARTIFACT_NAMES = (
    "clean",
    "scores",
    "stats",
    "thresholds",
    "cards",
    "diffs",
    "agreement",
    "rrssv",
    "ml",
    "recommendations",
    "hist",
)


def run_pipeline(
    config: PipelineConfig,
    threads: int | None = None,
    optional_stages: set[str] | None = None,
    artifacts: set[str] | None = None,
) -> PipelineResult:
    """Execute the workflow and emit the selected reports.

    threads overrides the configured worker count for the repeated-split
    stages; results are identical for any thread count.  optional_stages
    replaces the config's enabled flags when given: exactly the named
    stages out of validate, ml, and recommend run.  artifacts limits
    which report files are written (None writes everything); the run
    manifest is always written last.
    """
    threads = config.threads if threads is None else threads
    if optional_stages is None:
        optional_stages = {
            name
            for name, enabled in (
                ("validate", config.validate_enabled),
                ("ml", config.ml_enabled),
                ("recommend", config.rec_enabled),
            )
            if enabled
        }
    if artifacts is None:
        artifacts = set(ARTIFACT_NAMES)
    unknown = artifacts - set(ARTIFACT_NAMES)
    if unknown:
        raise ConfigError(f"unknown artifact name(s): {', '.join(sorted(unknown))}")
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    if "clean" in artifacts:
        (out / "clean").mkdir(exist_ok=True)

    registry = load_registry(config.registry_path)
    written: list[Path] = []
    timings: dict[str, float] = {}

    with _Stage(timings, "ingest"):
        if not config.sheets_dir.is_dir():
            raise DataError(f"sheet directory not found: {config.sheets_dir}")

        def stream() -> Iterable[CleanTable]:
            for raw in iter_sheet_dir(config.sheets_dir):
                table = clean_sheet(raw)
                if "clean" in artifacts:
                    path = out / "clean" / f"{table.sheet_id}.csv"
                    _write_csv(
                        path,
                        ["criteria", *table.countries],
                        [
                            [lab, *[format(v, "g") for v in row]]
                            for lab, row in zip(table.criteria, table.values)
                        ],
                    )
                    written.append(path)
                yield table

        dataset = build_dataset(stream(), registry, config.countries)

    if config.baseline_countries is not None:
        baseline = config.baseline_countries
    else:
        fraction = (
            config.split_fraction
            if config.split_fraction is not None
            else DEFAULT_FRACTION
        )
        baseline = list(
            split_countries(list(dataset.countries), config.split_seed, fraction).baseline
        )

    result = PipelineResult(
        config=config,
        dataset=dataset,
        split=None,  # filled by the split stage just below
        reports=[],
        diffs=[],
        stats={},
        timings=timings,
    )
    result.warnings.extend(dataset.warnings)

    with _Stage(timings, "split"):
        split = run_split(dataset, baseline, config.weights, scaling=config.scaling)
        result.split = split

    with _Stage(timings, "baseline_stats"):
        stats: dict = {}
        for group in GROUP_ORDER:
            if group == COMPOSITE_GROUP:
                sample = [split.cards_baseline[c].composite for c in split.baseline]
            else:
                pillar = next(p for p in PILLAR_ORDER if p.code == group)
                sample = [
                    split.cards_baseline[c].pillar_scores[pillar]
                    for c in split.baseline
                ]
            desc = describe(sample)
            sw = shapiro_wilk(sample)
            da: NormalityResult | None = (
                dagostino_pearson(sample) if desc.n >= 20 else None
            )
            stats[group] = {"sample": sample, "desc": desc, "shapiro": sw, "dagostino": da}
        result.stats = stats

    with _Stage(timings, "agreement"):
        result.reports = agreement_reports(split)
        result.diffs = tier_diff_rows(split)
        for report in result.reports:
            for flag in report.flags:
                result.warnings.append(f"{report.group}: {flag}")

    if "validate" in optional_stages:
        with _Stage(timings, "validate"):
            result.rrssv = run_rrssv(
                dataset,
                config.validate_seeds,
                config.validate_fraction,
                config.weights,
                scaling=config.scaling,
                threads=threads,
            )

    if "ml" in optional_stages:
        with _Stage(timings, "ml"):
            result.ml = evaluate_tier_model(
                dataset,
                config.ml_seeds,
                config.ml_fraction,
                lam=config.ml_lambda,
                widen=config.ml_widen,
                max_iter=config.ml_max_iter,
                pillar_weights=config.weights,
                scaling=config.scaling,
                threads=threads,
            )
            result.warnings.extend(result.ml.flags)

    if "recommend" in optional_stages:
        with _Stage(timings, "recommend"):
            template = None
            if config.rec_template_path is not None:
                if not config.rec_template_path.is_file():
                    raise ConfigError(
                        f"prompt template not found: {config.rec_template_path}"
                    )
                template = config.rec_template_path.read_text(encoding="utf-8")
            client = _build_client(config)
            entries = _axis_entries(split, config.rec_axis)
            flags = select_flagged(entries, config.rec_axis, config.rec_policy)
            result.recommendations = generate(flags, client, template=template)
            failed = [r for r in result.recommendations if r.status != "ok"]
            for rec in failed:
                result.warnings.append(
                    f"recommendation for {rec.country} failed: {rec.error}"
                )
            if config.ratings_path is not None:
                matrices = record_rubric(_load_ratings(config.ratings_path))
                result.rubric_alpha = {
                    "n_raters": len(next(iter(matrices.values())).raters),
                    "n_items": len(next(iter(matrices.values())).items),
                    "alpha": {
                        dim: krippendorff_alpha(matrix)
                        for dim, matrix in matrices.items()
                    },
                }

    with _Stage(timings, "report"):
        written.extend(emit_reports(result, artifacts))
    result.written = written

    manifest_path = out / "run_manifest.json"
    _dump_json(manifest_path, build_manifest(result))
    result.written.append(manifest_path)
    return result


# ---------------------------------------------------------------------
# Report emission.


def _axis_score_tier(card, group: str):
    if group == COMPOSITE_GROUP:
        return card.composite, card.composite_tier
    pillar = next(p for p in PILLAR_ORDER if p.code == group)
    return card.pillar_scores[pillar], card.tiers[pillar]


def emit_reports(result: PipelineResult, artifacts: set[str] | None = None) -> list[Path]:
    """Write the report files for the stages that ran.

    artifacts names which report groups to write; None writes them all.
    """
    if artifacts is None:
        artifacts = set(ARTIFACT_NAMES)
    out = result.config.output_dir
    split = result.split
    dataset = result.dataset
    qids = dataset.question_ids()
    written: list[Path] = []

    def emit(path: Path) -> Path:
        written.append(path)
        return path

    if "scores" in artifacts:
        # Raw scores for every country.
        all_cards = dict(split.cards_baseline)
        all_cards.update(split.cards_workflow)
        _write_csv(
            emit(out / "scores_raw.csv"),
            ["country", *qids, "gov_raw", "ene_raw", "bio_raw", "cli_raw"],
            [
                [
                    c,
                    *[_fmt3(all_cards[c].indicator_scores[q]) for q in qids],
                    *[_fmt3(all_cards[c].raw_pillar_scores[p]) for p in PILLAR_ORDER],
                ]
                for c in dataset.countries
            ],
        )
        _dump_json(
            emit(out / "scores_raw.json"),
            {
                c: {
                    "indicators": dict(all_cards[c].indicator_scores),
                    "raw_pillars": {
                        p.code: all_cards[c].raw_pillar_scores[p] for p in PILLAR_ORDER
                    },
                }
                for c in dataset.countries
            },
        )

    # Baseline descriptives and normality.
    stats_rows = []
    stats_json = {}
    for group in GROUP_ORDER if "stats" in artifacts else ():
        rec = result.stats[group]
        desc = rec["desc"]
        sw = rec["shapiro"]
        da = rec["dagostino"]
        sw_w, sw_p = round(sw.statistic, 4), round(sw.p_value, 4)
        row = [
            group,
            desc.n,
            _fmt3(desc.mean),
            _fmt3(desc.std),
            _fmt3(desc.minimum),
            _fmt3(desc.maximum),
            _fmt3(desc.median),
            _fmt3(desc.q1),
            _fmt3(desc.q3),
            _fmt4(sw_w),
            _fmt4(sw_p),
            str(sw.normal_at_5pct).lower(),
        ]
        payload = {
            "n": desc.n,
            "mean": desc.mean,
            "std": desc.std,
            "min": desc.minimum,
            "max": desc.maximum,
            "median": desc.median,
            "q1": desc.q1,
            "q3": desc.q3,
            "shapiro": {
                "statistic": sw_w,
                "p_value": sw_p,
                "normal_at_5pct": sw.normal_at_5pct,
            },
            "dagostino": None,
        }
        if da is not None:
            k2_s, k2_p = round(da.statistic, 4), round(da.p_value, 4)
            row += [_fmt4(k2_s), _fmt4(k2_p), str(da.normal_at_5pct).lower()]
            payload["dagostino"] = {
                "statistic": k2_s,
                "p_value": k2_p,
                "normal_at_5pct": da.normal_at_5pct,
            }
        else:
            row += ["", "", ""]
        stats_rows.append(row)
        stats_json[group] = payload
    if "stats" in artifacts:
        _write_csv(
            emit(out / "baseline_stats.csv"),
            [
                "group",
                "n",
                "mean",
                "std",
                "min",
                "max",
                "median",
                "q1",
                "q3",
                "shapiro_w",
                "shapiro_p",
                "shapiro_normal",
                "dagostino_k2",
                "dagostino_p",
                "dagostino_normal",
            ],
            stats_rows,
        )
        _dump_json(emit(out / "baseline_stats.json"), stats_json)

    if "thresholds" in artifacts:
        _write_csv(
            emit(out / "tier_thresholds.csv"),
            ["group", "q1", "q2", "q3", "digest"],
            [
                [
                    g,
                    _fmt3(split.thresholds[g].q1),
                    _fmt3(split.thresholds[g].q2),
                    _fmt3(split.thresholds[g].q3),
                    split.thresholds[g].digest(),
                ]
                for g in GROUP_ORDER
            ],
        )
        _dump_json(
            emit(out / "tier_thresholds.json"),
            {
                g: {
                    "q1": split.thresholds[g].q1,
                    "q2": split.thresholds[g].q2,
                    "q3": split.thresholds[g].q3,
                    "digest": split.thresholds[g].digest(),
                }
                for g in GROUP_ORDER
            },
        )

    if "cards" in artifacts:
        # Scorecards: baseline, workflow, reference.
        card_rows = []
        cards_json: dict = {"baseline": {}, "workflow": {}, "reference": {}}
        for role, cards, members in (
            ("baseline", split.cards_baseline, split.baseline),
            ("workflow", split.cards_workflow, split.holdout),
            ("reference", split.cards_reference, split.holdout),
        ):
            for c in members:
                scores = {}
                tiers = {}
                for g in GROUP_ORDER:
                    s, t = _axis_score_tier(cards[c], g)
                    scores[g] = s
                    tiers[g] = t.label
                card_rows.append(
                    [
                        c,
                        role,
                        *[_fmt3(scores[g]) for g in GROUP_ORDER],
                        *[tiers[g] for g in GROUP_ORDER],
                    ]
                )
                cards_json[role][c] = {"scores": scores, "tiers": tiers}
        _write_csv(
            emit(out / "scorecards.csv"),
            [
                "country",
                "role",
                "gov",
                "ene",
                "bio",
                "cli",
                "esg",
                "gov_tier",
                "ene_tier",
                "bio_tier",
                "cli_tier",
                "esg_tier",
            ],
            card_rows,
        )
        _dump_json(emit(out / "scorecards.json"), cards_json)

    if "diffs" in artifacts:
        # Per-tier overlay table.
        _write_csv(
            emit(out / "tier_diffs.csv"),
            ["group", "classification", "baseline", "workflow", "diff"],
            [
                [
                    GROUP_DISPLAY[row.group],
                    row.tier.label,
                    _fmt3(row.baseline_mean),
                    _fmt3(row.workflow_mean),
                    _fmt3(row.diff),
                ]
                for row in result.diffs
            ],
        )

    if "agreement" in artifacts:
        _write_csv(
            emit(out / "agreement.csv"),
            [
                "group",
                "n_pairs",
                "mae",
                "rmse",
                "bias",
                "spearman_rho",
                "accuracy",
                "macro_f1",
                "cohen_kappa",
                "thresholds_digest",
                "flags",
            ],
            [
                [
                    r.group,
                    r.n_pairs,
                    _fmt3(r.mae),
                    _fmt3(r.rmse),
                    _fmt3(r.bias),
                    _fmt3(r.spearman_rho),
                    _fmt3(r.accuracy),
                    _fmt3(r.macro_f1),
                    _fmt3(r.cohen_kappa),
                    r.thresholds_digest,
                    "; ".join(r.flags),
                ]
                for r in result.reports
            ],
        )
        _dump_json(
            emit(out / "agreement.json"),
            {
                r.group: {
                    "n_pairs": r.n_pairs,
                    "mae": r.mae,
                    "rmse": r.rmse,
                    "bias": r.bias,
                    "spearman_rho": r.spearman_rho,
                    "accuracy": r.accuracy,
                    "macro_f1": r.macro_f1,
                    "cohen_kappa": r.cohen_kappa,
                    "thresholds_digest": r.thresholds_digest,
                    "flags": list(r.flags),
                }
                for r in result.reports
            },
        )

    # Stability validation.
    if result.rrssv is not None and "rrssv" in artifacts:
        rep = result.rrssv
        metric_keys = list(rep.metrics.keys())
        _write_csv(
            emit(out / "rrssv_per_seed.csv"),
            ["seed", *metric_keys],
            [
                [
                    seed,
                    *[_fmt3(rep.metrics[k].per_seed[i]) for k in metric_keys],
                ]
                for i, seed in enumerate(rep.seeds)
            ],
        )
        _write_csv(
            emit(out / "rrssv_summary.csv"),
            ["metric", "mean", "std"],
            [
                [k, _fmt3(rep.metrics[k].mean), _fmt3(rep.metrics[k].std)]
                for k in metric_keys
            ],
        )
        _dump_json(
            emit(out / "rrssv.json"),
            {
                "seeds": list(rep.seeds),
                "fraction": rep.fraction,
                "n_countries": rep.n_countries,
                "baseline_size": rep.baseline_size,
                "plans": [
                    {"seed": plan.seed, "baseline": list(plan.baseline)}
                    for plan in rep.plans
                ],
                "metrics": {
                    k: {
                        "mean": rep.metrics[k].mean,
                        "std": rep.metrics[k].std,
                        "per_seed": list(rep.metrics[k].per_seed),
                    }
                    for k in metric_keys
                },
            },
        )

    # Tier predictor evaluation.
    if result.ml is not None and "ml" in artifacts:
        ml = result.ml
        _write_csv(
            emit(out / "ml_report.csv"),
            ["metric", "mean", "std"],
            [
                [k, _fmt3(ml.metrics[k].mean), _fmt3(ml.metrics[k].std)]
                for k in ml.metrics
            ],
        )
        _dump_json(
            emit(out / "ml_report.json"),
            {
                "seeds": list(ml.seeds),
                "fraction": ml.fraction,
                "lambda": ml.lam,
                "widened": ml.widened,
                "max_iter": ml.max_iter,
                "all_converged": ml.all_converged,
                "flags": list(ml.flags),
                "metrics": {
                    k: {
                        "mean": ml.metrics[k].mean,
                        "std": ml.metrics[k].std,
                        "per_seed": list(ml.metrics[k].per_seed),
                    }
                    for k in ml.metrics
                },
            },
        )

    # Recommendations and rubric reliability.
    if result.recommendations is not None and "recommendations" in artifacts:
        lines = []
        for rec in result.recommendations:
            payload = {
                "country": rec.country,
                "group": rec.group,
                "score": rec.score,
                "tier": rec.tier.label,
                "feedback": rec.feedback,
                "prompt": rec.prompt,
                "status": rec.status,
                "response_text": rec.response_text,
                "model_id": rec.model_id,
                "retries": rec.retries,
                "latency_s": rec.latency_s,
                "timestamp_utc": rec.timestamp_utc,
                "error": rec.error,
            }
            lines.append(
                json.dumps(_round12(payload), sort_keys=True, ensure_ascii=False)
            )
        emit(out / "recommendations.jsonl").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )
    if result.rubric_alpha is not None and "recommendations" in artifacts:
        _dump_json(emit(out / "rubric_alpha.json"), result.rubric_alpha)

    # Score distribution histograms (reproducible, outside the byte contract).
    if "hist" in artifacts:
        written.extend(emit_histograms(result))
    return written


def emit_histograms(result: PipelineResult) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    out = result.config.output_dir
    split = result.split
    written = []
    for group in GROUP_ORDER:
        base_vals = [
            _axis_score_tier(split.cards_baseline[c], group)[0] for c in split.baseline
        ]
        wf_vals = [
            _axis_score_tier(split.cards_workflow[c], group)[0] for c in split.holdout
        ]
        if result.config.scaling:
            bins = np.linspace(1.0, 10.0, 19)
        else:
            lo = min(base_vals + wf_vals)
            hi = max(base_vals + wf_vals)
            bins = np.linspace(lo, hi if hi > lo else lo + 1.0, 19)
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=100)
        ax.hist(base_vals, bins=bins, alpha=0.65, label="baseline")
        ax.hist(wf_vals, bins=bins, alpha=0.65, label="workflow")
        ax.set_title(f"{GROUP_DISPLAY[group]} score distribution")
        ax.set_xlabel("score")
        ax.set_ylabel("countries")
        ax.legend()
        fig.tight_layout()
        path = out / f"hist_{group}.png"
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written


def build_manifest(result: PipelineResult) -> dict:
    """Run provenance: inputs, digests, seeds, warnings, timings, outputs."""
    config = result.config
    inputs: dict[str, str] = {}

    def add_input(path: Path | None) -> None:
        if path is not None and path.is_file():
            inputs[path.name] = _sha256(path)

    add_input(config.config_path)
    add_input(config.registry_path)
    for sheet in sorted(config.sheets_dir.glob("*.csv")):
        inputs[f"sheets/{sheet.name}"] = _sha256(sheet)
    manifest_file = config.sheets_dir / "sheets.json"
    add_input(manifest_file if manifest_file.is_file() else None)
    add_input(config.ratings_path)
    add_input(config.rec_template_path)

    outputs = {}
    out = config.output_dir
    for path in sorted(result.written):
        outputs[path.relative_to(out).as_posix()] = _sha256(path)

    return {
        "package_version": __version__,
        "python_version": sys.version.split()[0],
        "platform": platform.platform(),
        "config_file": config.config_path.name,
        "inputs": inputs,
        "countries": list(result.dataset.countries),
        "baseline": list(result.split.baseline),
        "holdout": list(result.split.holdout),
        "scaling": config.scaling,
        "pillar_weights": {p.code: config.weights[p] for p in PILLAR_ORDER},
        "validate_seeds": list(config.validate_seeds)
        if result.rrssv is not None
        else [],
        "ml_seeds": list(config.ml_seeds) if result.ml is not None else [],
        "warnings": list(result.warnings),
        "stage_timings_s": {k: round(v, 6) for k, v in result.timings.items()},
        "outputs": outputs,
    }
