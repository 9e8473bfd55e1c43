"""Deterministic human-AI benchmarking workflow for survey-based ESG scores.

The package ingests aggregated survey sheets, scores countries on four
pillars and a weighted composite, derives quartile tiers from a baseline
subset, classifies held-out countries, quantifies agreement between the
full-information and baseline-anchored views, validates stability under
repeated random sub-sampling, trains a small tier predictor, and drafts
rubric-governed improvement recommendations through a pluggable LLM
client with a deterministic offline stub.

Every stage is reproducible: fixed iteration orders, an explicit
splitmix64 generator for splits, and pinned report formats that are
compared byte for byte against independently generated references.
"""

from .agreement import (
    AgreementReport,
    CategoricalMetrics,
    ErrorMetrics,
    RatingsMatrix,
    ScorePair,
    TierDiffRow,
    agreement_report,
    categorical_metrics,
    error_metrics,
    krippendorff_alpha,
    per_tier_diff_table,
    spearman_rho,
)
from .baseline import (
    DescriptiveStats,
    NormalityResult,
    Tier,
    TIER_ORDER,
    TierThresholds,
    assign_tier,
    dagostino_pearson,
    describe,
    quantile,
    shapiro_wilk,
    tier_from_label,
    tier_thresholds,
)
from .errors import ConfigError, DataError, EsgbenchError, IngestError, TransportError
from .ingest import (
    CleanTable,
    RawSheet,
    clean_sheet,
    iter_sheet_dir,
    load_sheet,
    load_sheet_dir,
)
from .llm import HttpChatClient, LlmClient, LlmResponse, StubClient
from .ml_baseline import (
    FeatureMatrix,
    LrModel,
    Standardizer,
    nll_gradient,
    predict,
    predict_proba,
    train,
)
from .recommend import (
    DEFAULT_PROMPT_TEMPLATE,
    FlagPolicy,
    FlagRecord,
    RecommendationRecord,
    RubricScores,
    build_prompt,
    feedback_line,
    generate,
    record_rubric,
    round_half_up,
    select_flagged,
)
from .rng import SplitMix64
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
    Pillar,
    QuestionRegistry,
    QuestionSpec,
    ResponseType,
    dx5_option_scores,
    load_registry,
    registry_from_dict,
)
from .validation import (
    MetricAggregate,
    RrssvReport,
    SplitPlan,
    aggregate_metrics,
    baseline_size,
    split_countries,
)
from .workflow import (
    MlReport,
    SplitResult,
    SurveyDataset,
    agreement_reports,
    build_dataset,
    dataset_from_dir,
    evaluate_tier_model,
    run_rrssv,
    run_split,
    split_metrics,
    tier_diff_rows,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
