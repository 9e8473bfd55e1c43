"""Flagging low-tier countries and generating rubric-governed advice.

The default policy flags the Weak and Average tiers on a chosen group
axis (a pillar or the composite); an alternate policy flags everything
strictly below an absolute score threshold.  Each flagged country gets
a fixed feedback line with its score rounded half-up to two decimals,
and a prompt built from a template whose four placeholders ({country},
{score}, {tier}, {pillar}) are all mandatory.

Rubric ratings collected from human raters (relevance, actionability,
faithfulness, each 1..5) are packed into one reliability matrix per
dimension for Krippendorff's alpha.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .agreement import RatingsMatrix
from .baseline import Tier
from .errors import ConfigError, DataError, TransportError
from .llm import LlmClient
from .taxonomy import COMPOSITE_GROUP, Pillar

LOGGER = logging.getLogger(__name__)

RUBRIC_DIMENSIONS = ("relevance", "actionability", "faithfulness")

DEFAULT_PROMPT_TEMPLATE = (
    "You are an ESG policy analyst. Country {country} scored {score}/10 on "
    "{pillar} and sits in the {tier} tier of the benchmarked group.\n"
    "Write three specific, actionable recommendations for raising this "
    "country's standing.\n"
    "Ground every statement in the figures given above. Do not invent "
    "statistics, rankings, or facts that were not supplied; if the evidence "
    "is insufficient for a claim, say so instead."
)

_PLACEHOLDERS = ("{country}", "{score}", "{tier}", "{pillar}")


def round_half_up(value: float, places: int = 2) -> str:
    """Decimal half-up rounding, returned as a fixed-point string."""
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def feedback_line(score: float) -> str:
    """The fixed per-country feedback sentence, e.g. 'Scored only 6.75/10.'"""
    return f"Scored only {round_half_up(score, 2)}/10."


@dataclass(frozen=True)
class FlagPolicy:
    """How countries are selected for recommendations.

    mode "tier" flags the Weak and Average tiers; mode "threshold" flags
    scores strictly below `threshold`.
    """

    mode: str = "tier"
    threshold: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("tier", "threshold"):
            raise ConfigError(f"unknown flag policy mode {self.mode!r}")
        if self.mode == "threshold" and self.threshold is None:
            raise ConfigError("threshold policy needs a threshold value")


@dataclass(frozen=True)
class FlagRecord:
    country: str
    group: str
    score: float
    tier: Tier

    @property
    def feedback(self) -> str:
        return feedback_line(self.score)


@dataclass
class RecommendationRecord:
    country: str
    group: str
    score: float
    tier: Tier
    feedback: str
    prompt: str
    response_text: str | None
    model_id: str
    retries: int
    latency_s: float
    timestamp_utc: str
    status: str  # "ok" | "error"
    error: str | None = None


def select_flagged(
    entries: list[tuple[str, float, Tier]],
    group: str,
    policy: FlagPolicy | None = None,
) -> list[FlagRecord]:
    """Pick the countries needing recommendations on one group axis.

    entries are (country, score, tier) triples.  The result is ordered
    worst first: by tier rank, then ascending score, then country code.
    """
    if policy is None:
        policy = FlagPolicy()
    flagged = []
    for country, score, tier in entries:
        if policy.mode == "tier":
            hit = tier in (Tier.WEAK, Tier.AVERAGE)
        else:
            hit = score < policy.threshold
        if hit:
            flagged.append(FlagRecord(country=country, group=group, score=score, tier=tier))
    flagged.sort(key=lambda f: (int(f.tier), f.score, f.country))
    return flagged


def _group_display(group: str) -> str:
    if group == COMPOSITE_GROUP:
        return "the overall ESG composite"
    return Pillar[group].display


def build_prompt(flag: FlagRecord, template: str | None = None) -> str:
    """Render the prompt for one flagged country.

    The template must contain all four placeholders; a missing one is a
    configuration error naming it.  The score renders half-up to two
    decimals, matching the feedback line.
    """
    if template is None:
        template = DEFAULT_PROMPT_TEMPLATE
    missing = [p for p in _PLACEHOLDERS if p not in template]
    if missing:
        raise ConfigError(
            f"prompt template is missing placeholders: {', '.join(missing)}"
        )
    return template.format(
        country=flag.country,
        score=round_half_up(flag.score, 2),
        tier=flag.tier.label,
        pillar=_group_display(flag.group),
    )


def generate(
    flags: list[FlagRecord],
    client: LlmClient,
    template: str | None = None,
) -> list[RecommendationRecord]:
    """Request a recommendation for every flagged country, in order.

    Transport failures are recorded per country and do not abort the
    batch; the output always has one record per flag, input order
    preserved.  Configuration problems (bad template) still raise.
    """
    records: list[RecommendationRecord] = []
    for flag in flags:
        prompt = build_prompt(flag, template)
        try:
            response = client.complete(prompt)
        except TransportError as exc:
            LOGGER.error("recommendation for %s failed: %s", flag.country, exc)
            records.append(
                RecommendationRecord(
                    country=flag.country,
                    group=flag.group,
                    score=flag.score,
                    tier=flag.tier,
                    feedback=flag.feedback,
                    prompt=prompt,
                    response_text=None,
                    model_id=client.model_id,
                    retries=0,
                    latency_s=0.0,
                    timestamp_utc="",
                    status="error",
                    error=str(exc),
                )
            )
            continue
        records.append(
            RecommendationRecord(
                country=flag.country,
                group=flag.group,
                score=flag.score,
                tier=flag.tier,
                feedback=flag.feedback,
                prompt=prompt,
                response_text=response.text,
                model_id=response.model_id,
                retries=response.retries,
                latency_s=response.latency_s,
                timestamp_utc=response.timestamp_utc,
                status="ok",
            )
        )
    return records


@dataclass(frozen=True)
class RubricScores:
    """One rater's 1..5 judgments of one recommendation."""

    rater: str
    item: str
    relevance: int | None = None
    actionability: int | None = None
    faithfulness: int | None = None

    def __post_init__(self) -> None:
        for dim in RUBRIC_DIMENSIONS:
            value = getattr(self, dim)
            if value is None:
                continue
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise DataError(
                    f"rubric {dim} for ({self.rater}, {self.item}) must be an "
                    f"integer in 1..5, got {value!r}"
                )


def record_rubric(entries: list[RubricScores]) -> dict[str, RatingsMatrix]:
    """Pack rubric entries into one raters-by-items matrix per dimension.

    Raters and items keep first-appearance order.  A rater scoring the
    same item twice is a data error.
    """
    raters: list[str] = []
    items: list[str] = []
    seen: set[tuple[str, str]] = set()
    for e in entries:
        key = (e.rater, e.item)
        if key in seen:
            raise DataError(f"duplicate rubric entry for rater/item {key!r}")
        seen.add(key)
        if e.rater not in raters:
            raters.append(e.rater)
        if e.item not in items:
            items.append(e.item)

    matrices: dict[str, RatingsMatrix] = {}
    for dim in RUBRIC_DIMENSIONS:
        grid: list[list[float | None]] = [
            [None] * len(items) for _ in raters
        ]
        for e in entries:
            value = getattr(e, dim)
            if value is not None:
                grid[raters.index(e.rater)][items.index(e.item)] = float(value)
        matrices[dim] = RatingsMatrix(
            raters=tuple(raters),
            items=tuple(items),
            values=tuple(tuple(row) for row in grid),
        )
    return matrices
