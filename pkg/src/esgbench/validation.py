"""Repeated random sub-sampling: split plans and cross-seed aggregation.

A split plan sorts the country codes, shuffles them with the seeded
generator from `rng`, and takes the first k as the baseline group, where
k rounds half-up from fraction * N with a floor of 4 (quartile
thresholds need four observations).  Aggregation across seeds reports
the mean and the n-1 standard deviation of every metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError
from .rng import SplitMix64

MIN_COUNTRIES = 10
MIN_BASELINE = 4
DEFAULT_FRACTION = 0.4
DEFAULT_SEED_COUNT = 20  # repetition count is an artifact choice, not a given


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    fraction: float
    baseline: tuple[str, ...]
    holdout: tuple[str, ...]


@dataclass(frozen=True)
class MetricAggregate:
    mean: float
    std: float
    per_seed: tuple[float, ...]


@dataclass
class RrssvReport:
    seeds: tuple[int, ...]
    fraction: float
    n_countries: int
    baseline_size: int
    metrics: dict[str, MetricAggregate]
    plans: tuple[SplitPlan, ...] = ()


def baseline_size(n_countries: int, fraction: float) -> int:
    """Half-up rounding of fraction * N, floored at MIN_BASELINE."""
    k = int(math.floor(fraction * n_countries + 0.5))
    return max(k, MIN_BASELINE)


def split_countries(
    countries: list[str], seed: int, fraction: float = DEFAULT_FRACTION
) -> SplitPlan:
    """Deterministic baseline/holdout split of the country list.

    The input order never matters: codes are sorted before shuffling, so
    any permutation of the same set yields the same plan for a seed.
    """
    if len(set(countries)) != len(countries):
        raise DataError("country list contains duplicates")
    if not 0.0 < fraction < 1.0:
        raise DataError(f"split fraction must be in (0, 1), got {fraction!r}")
    n = len(countries)
    if n < MIN_COUNTRIES:
        raise DataError(
            f"insufficient countries for split: need at least "
            f"{MIN_COUNTRIES}, got {n}"
        )
    ordered = sorted(countries)
    SplitMix64(seed).shuffle(ordered)
    k = baseline_size(n, fraction)
    if k >= n:
        raise DataError(
            f"split fraction {fraction!r} leaves no holdout countries (k={k}, N={n})"
        )
    return SplitPlan(
        seed=seed,
        fraction=fraction,
        baseline=tuple(sorted(ordered[:k])),
        holdout=tuple(sorted(ordered[k:])),
    )


def aggregate_metrics(per_seed: list[dict[str, float]]) -> dict[str, MetricAggregate]:
    """Mean and n-1 std of each metric across seed repetitions.

    Every repetition must report the same metric set; at least two are
    required for the standard deviation to exist.
    """
    if len(per_seed) < 2:
        raise DataError(
            f"aggregation needs at least 2 repetitions, got {len(per_seed)}"
        )
    names = list(per_seed[0].keys())
    for i, metrics in enumerate(per_seed[1:], start=1):
        if list(metrics.keys()) != names:
            raise DataError(f"repetition {i} reports a different metric set")
    out: dict[str, MetricAggregate] = {}
    s = len(per_seed)
    for name in names:
        values = [metrics[name] for metrics in per_seed]
        total = 0.0
        for v in values:
            total += v
        mean = total / s
        ssd = 0.0
        for v in values:
            d = v - mean
            ssd += d * d
        std = math.sqrt(ssd / (s - 1))
        out[name] = MetricAggregate(mean=mean, std=std, per_seed=tuple(values))
    return out
