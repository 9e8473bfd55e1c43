"""Country-level scoring: indicator scores, pillar means, composite, scaling.

The arithmetic conventions here are deliberately pinned, because reports
are compared byte-for-byte against independently generated expected
outputs.  Sums run left to right in registry order (options within a
question, questions within a pillar, pillars in GOV/ENE/BIO/CLI order),
using plain float arithmetic.  Changing an iteration order is a
format-breaking change.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import DataError
from .taxonomy import PILLAR_ORDER, Pillar, QuestionSpec

LOGGER = logging.getLogger(__name__)

SCALE_LO = 1.0
SCALE_HI = 10.0
SCALE_MID = (SCALE_LO + SCALE_HI) / 2.0

DEFAULT_PILLAR_WEIGHTS = {
    Pillar.GOV: 0.1,
    Pillar.ENE: 0.5,
    Pillar.BIO: 0.3,
    Pillar.CLI: 0.1,
}

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ResponseDistribution:
    """Aggregated answer shares for one (country, question) pair.

    freqs maps option label to its observed weight (a percent or a
    weighted count; only ratios matter).  Weights must be finite and
    non-negative.
    """

    country: str
    question_id: str
    freqs: dict[str, float]

    def __post_init__(self) -> None:
        for label, f in self.freqs.items():
            if not math.isfinite(f) or f < 0:
                raise DataError(
                    f"({self.country}, {self.question_id}): frequency for "
                    f"{label!r} must be finite and >= 0, got {f!r}"
                )


@dataclass(frozen=True)
class PillarWeights:
    """Normative pillar weights for the composite score; must sum to 1."""

    values: dict[Pillar, float] = field(
        default_factory=lambda: dict(DEFAULT_PILLAR_WEIGHTS)
    )

    def __post_init__(self) -> None:
        missing = [p.code for p in PILLAR_ORDER if p not in self.values]
        if missing:
            raise DataError(f"pillar weights missing entries for {missing}")
        for p, w in self.values.items():
            if not math.isfinite(w) or w < 0:
                raise DataError(f"pillar weight for {p.code} must be >= 0, got {w!r}")
        total = 0.0
        for p in PILLAR_ORDER:
            total += self.values[p]
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise DataError(
                f"pillar weights must sum to 1 within {_WEIGHT_SUM_TOL}, "
                f"got {total!r}"
            )

    def __getitem__(self, pillar: Pillar) -> float:
        return self.values[pillar]


@dataclass(frozen=True)
class ScalingParams:
    """Min-max parameters fitted on one group's score distribution."""

    group: str
    observed_min: float
    observed_max: float
    lo: float = SCALE_LO
    hi: float = SCALE_HI

    @property
    def degenerate(self) -> bool:
        return self.observed_min == self.observed_max


@dataclass
class CountryScoreCard:
    """All scores for one country: per question, per pillar, composite.

    pillar_scores holds the values on the reporting axis (min-max scaled
    when scaling is on, raw otherwise); raw_pillar_scores always holds
    the unscaled means.  Tier fields are filled in by the classification
    step and stay None until then.
    """

    country: str
    indicator_scores: dict[str, float]
    raw_pillar_scores: dict[Pillar, float]
    pillar_scores: dict[Pillar, float]
    composite: float | None = None
    tiers: dict = field(default_factory=dict)
    composite_tier: object | None = None


def indicator_score(dist: ResponseDistribution, spec: QuestionSpec) -> float:
    """Expected score of one question in one country.

    Weighted mean of option scores under the observed answer shares,
    after dropping the "no usable answer" labels:

        x = sum(f_o * s_o) / sum(f_o)   over scored options o

    Option labels in the distribution must be known to the question
    spec, either as scored options or as na labels; anything else is a
    data error rather than a silent drop.  A spec option absent from
    the distribution simply contributes zero weight.
    """
    if dist.question_id != spec.question_id:
        raise DataError(
            f"distribution for '{dist.question_id}' scored against spec "
            f"'{spec.question_id}'"
        )
    for label in dist.freqs:
        if label not in spec.option_scores and label not in spec.na_labels:
            raise DataError(
                f"({dist.country}, {dist.question_id}): unknown option label "
                f"{label!r}"
            )
    num = 0.0
    den = 0.0
    for label, score in spec.option_scores.items():
        f = dist.freqs.get(label, 0.0)
        num += f * score
        den += f
    if den == 0.0:
        raise DataError(
            f"no scoreable responses for ({dist.country}, {dist.question_id})"
        )
    return num / den


def pillar_score(scores: list[float], weights: list[float] | None = None) -> float:
    """Aggregate one pillar's indicator scores into a pillar score.

    Unweighted mean by default; optional positive per-question weights
    turn it into a weighted mean.
    """
    if not scores:
        raise DataError("pillar has no scored indicators")
    if weights is None:
        total = 0.0
        for x in scores:
            total += x
        return total / len(scores)
    if len(weights) != len(scores):
        raise DataError(
            f"{len(weights)} weights for {len(scores)} indicator scores"
        )
    num = 0.0
    den = 0.0
    for x, w in zip(scores, weights):
        if not math.isfinite(w) or w <= 0:
            raise DataError(f"indicator weight must be positive, got {w!r}")
        num += w * x
        den += w
    return num / den


def composite_esg(
    pillar_scores: dict[Pillar, float], weights: PillarWeights | None = None
) -> float:
    """Weighted sum of the four pillar scores (weights sum to 1)."""
    if weights is None:
        weights = PillarWeights()
    missing = [p.code for p in PILLAR_ORDER if p not in pillar_scores]
    if missing:
        raise DataError(f"composite needs all four pillar scores; missing {missing}")
    total = 0.0
    for p in PILLAR_ORDER:
        total += weights[p] * pillar_scores[p]
    return total


def minmax_scale_group(
    scores: dict[str, float],
    group: str,
    lo: float = SCALE_LO,
    hi: float = SCALE_HI,
) -> tuple[dict[str, float], ScalingParams]:
    """Fit min-max scaling on a group's scores and apply it to them.

    Maps the observed minimum to lo and the observed maximum to hi.  A
    degenerate group (all scores equal) maps everything to the midpoint
    of [lo, hi] and logs a warning, since the spread carries no
    information to scale by.
    """
    if not scores:
        raise DataError(f"group '{group}': no scores to scale")
    values = list(scores.values())
    mn = min(values)
    mx = max(values)
    params = ScalingParams(group=group, observed_min=mn, observed_max=mx, lo=lo, hi=hi)
    if params.degenerate:
        LOGGER.warning(
            "group '%s': degenerate scaling (min == max == %r); "
            "all scores map to %r",
            group,
            mn,
            (lo + hi) / 2.0,
        )
    scaled = {c: scale_value(x, params, clamp=False) for c, x in scores.items()}
    return scaled, params


def scale_value(x: float, params: ScalingParams, clamp: bool) -> float:
    """Apply fitted min-max parameters to one score.

    With clamp=True (used for countries outside the fitting set) results
    are clipped into [lo, hi].
    """
    if params.degenerate:
        return (params.lo + params.hi) / 2.0
    span = params.observed_max - params.observed_min
    y = params.lo + (params.hi - params.lo) * (x - params.observed_min) / span
    if clamp:
        if y < params.lo:
            return params.lo
        if y > params.hi:
            return params.hi
    return y
