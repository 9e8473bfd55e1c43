"""Agreement between a baseline and a workflow view of the same countries.

Continuous agreement is summarized by mean absolute error, root mean
squared error, and signed bias (workflow minus baseline), plus Spearman
rank correlation computed as the Pearson correlation of average ranks.
Categorical agreement over tier labels uses accuracy, macro-averaged F1,
and Cohen's kappa.  Rubric ratings from multiple raters are checked with
Krippendorff's alpha under the ordinal distance metric.

Sums run left to right over the given pair order; callers pass pairs in
canonical country order so reports are reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .baseline import Tier, TierThresholds, TIER_ORDER
from .errors import DataError


@dataclass(frozen=True)
class ScorePair:
    """One country's score under the baseline view and the workflow view."""

    country: str
    baseline: float
    workflow: float


@dataclass(frozen=True)
class ErrorMetrics:
    n: int
    mae: float
    rmse: float
    bias: float


@dataclass(frozen=True)
class CategoricalMetrics:
    n: int
    accuracy: float
    macro_f1: float
    cohen_kappa: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class TierDiffRow:
    """One row of the per-tier overlay table.

    Means are None when that side has no members in the tier; diff is
    workflow minus baseline and exists only when both sides do.
    """

    group: str
    tier: Tier
    baseline_mean: float | None
    workflow_mean: float | None
    diff: float | None


@dataclass
class AgreementReport:
    group: str
    n_pairs: int
    mae: float
    rmse: float
    bias: float
    spearman_rho: float
    accuracy: float
    macro_f1: float
    cohen_kappa: float
    thresholds_digest: str
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class RatingsMatrix:
    """Reliability data: one row per rater, one column per item.

    Missing entries are None.  Values are the raters' ordinal scores.
    """

    raters: tuple[str, ...]
    items: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.raters):
            raise DataError(
                f"{len(self.values)} rating rows for {len(self.raters)} raters"
            )
        for row in self.values:
            if len(row) != len(self.items):
                raise DataError(
                    f"rating row of length {len(row)} for {len(self.items)} items"
                )


def error_metrics(pairs: list[ScorePair]) -> ErrorMetrics:
    """MAE, RMSE, and signed bias of workflow minus baseline."""
    if not pairs:
        raise DataError("error metrics need at least one pair")
    n = len(pairs)
    abs_sum = 0.0
    sq_sum = 0.0
    diff_sum = 0.0
    for p in pairs:
        d = p.workflow - p.baseline
        abs_sum += abs(d)
        sq_sum += d * d
        diff_sum += d
    return ErrorMetrics(
        n=n, mae=abs_sum / n, rmse=math.sqrt(sq_sum / n), bias=diff_sum / n
    )


def _average_ranks(values: list[float]) -> list[float]:
    """Ranks 1..n with ties sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman_rho(pairs: list[ScorePair]) -> float:
    """Spearman correlation: Pearson correlation of average ranks."""
    if len(pairs) < 3:
        raise DataError(f"spearman needs at least 3 pairs, got {len(pairs)}")
    xs = [p.baseline for p in pairs]
    ys = [p.workflow for p in pairs]
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    n = len(pairs)
    mx = 0.0
    my = 0.0
    for a, b in zip(rx, ry):
        mx += a
        my += b
    mx /= n
    my /= n
    sxy = 0.0
    sxx = 0.0
    syy = 0.0
    for a, b in zip(rx, ry):
        da = a - mx
        db = b - my
        sxy += da * db
        sxx += da * da
        syy += db * db
    if sxx == 0.0 or syy == 0.0:
        raise DataError("undefined correlation: a side is constant")
    return sxy / math.sqrt(sxx * syy)


def categorical_metrics(
    a: list[Tier], b: list[Tier], classes: tuple[Tier, ...] | None = None
) -> CategoricalMetrics:
    """Accuracy, macro F1, and Cohen's kappa between two label lists.

    a is the baseline labelling, b the workflow labelling.  Macro F1
    averages per-class F1 over `classes` (all four tiers by default); a
    class absent from both sides contributes 0 and raises a flag.  The
    kappa degenerate case (expected agreement 1, i.e. both sides constant
    on the same label) maps to 1 when observed agreement is 1 and to 0
    otherwise, with a flag either way.
    """
    if len(a) != len(b):
        raise DataError(f"label lists differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise DataError("categorical metrics need at least one pair")
    if classes is None:
        classes = TIER_ORDER
    n = len(a)
    flags: list[str] = []

    agree = 0
    for x, y in zip(a, b):
        if x == y:
            agree += 1
    accuracy = agree / n

    f1_total = 0.0
    for cls in classes:
        tp = fp = fn = 0
        for x, y in zip(a, b):
            if y == cls and x == cls:
                tp += 1
            elif y == cls:
                fp += 1
            elif x == cls:
                fn += 1
        if tp == 0 and fp == 0 and fn == 0:
            flags.append(f"class '{cls.label}' absent from both sides; F1 set to 0")
            continue
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        if precision + recall > 0:
            f1_total += 2.0 * precision * recall / (precision + recall)
    macro_f1 = f1_total / len(classes)

    p_o = accuracy
    p_e = 0.0
    for cls in classes:
        ca = sum(1 for x in a if x == cls)
        cb = sum(1 for y in b if y == cls)
        p_e += (ca / n) * (cb / n)
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
        flags.append("kappa degenerate: expected agreement is 1")
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)

    return CategoricalMetrics(
        n=n,
        accuracy=accuracy,
        macro_f1=macro_f1,
        cohen_kappa=kappa,
        flags=tuple(flags),
    )


def krippendorff_alpha(matrix: RatingsMatrix) -> float:
    """Krippendorff's alpha with the ordinal distance metric.

    Built on the coincidence-matrix formulation: each item with at least
    two ratings contributes its ordered value pairs, weighted by
    1/(ratings-1).  The ordinal distance between categories c <= k is
    the squared sum of coincidence margins between them, with the two
    endpoints counted half.

    Needs at least two items with two or more ratings each; otherwise
    there is no between-item evidence and alpha is undefined.
    """
    columns = [
        [row[j] for row in matrix.values if row[j] is not None]
        for j in range(len(matrix.items))
    ]
    pairable = [col for col in columns if len(col) >= 2]
    if len(pairable) < 2:
        raise DataError(
            "alpha undefined: need at least 2 items with at least 2 ratings each"
        )

    categories = sorted({v for col in pairable for v in col})
    index = {c: i for i, c in enumerate(categories)}
    k = len(categories)

    coincidence = [[0.0] * k for _ in range(k)]
    for col in pairable:
        m_u = len(col)
        for i, vi in enumerate(col):
            for j, vj in enumerate(col):
                if i != j:
                    coincidence[index[vi]][index[vj]] += 1.0 / (m_u - 1)
    margins = [sum(row) for row in coincidence]
    total = sum(margins)

    def dist_sq(ci: int, cj: int) -> float:
        if ci == cj:
            return 0.0
        lo, hi = (ci, cj) if ci < cj else (cj, ci)
        s = 0.0
        for g in range(lo, hi + 1):
            s += margins[g]
        s -= (margins[lo] + margins[hi]) / 2.0
        return s * s

    d_o = 0.0
    for i in range(k):
        for j in range(k):
            if coincidence[i][j]:
                d_o += coincidence[i][j] * dist_sq(i, j)
    d_o /= total

    d_e = 0.0
    for i in range(k):
        for j in range(k):
            if i != j:
                d_e += margins[i] * margins[j] * dist_sq(i, j)
    d_e /= total * (total - 1.0)

    if d_e == 0.0:
        # All pairable values share one category: perfect agreement.
        return 1.0
    return 1.0 - d_o / d_e


def per_tier_diff_table(
    baseline: dict[str, list[tuple[float, Tier]]],
    workflow: dict[str, list[tuple[float, Tier]]],
) -> list[TierDiffRow]:
    """Per-tier mean scores of both sides, in the overlay-table layout.

    Inputs map group label to (score, tier) entries for that side's
    countries.  Groups iterate in the given key order, tiers in rank
    order.  Tiers with no members on either side are left out; a tier
    populated on one side only gets a row with the other mean missing.
    """
    groups = list(baseline.keys())
    for g in workflow:
        if g not in baseline:
            groups.append(g)
    rows: list[TierDiffRow] = []
    for group in groups:
        b_entries = baseline.get(group, [])
        w_entries = workflow.get(group, [])
        for tier in TIER_ORDER:
            b_scores = [s for s, t in b_entries if t == tier]
            w_scores = [s for s, t in w_entries if t == tier]
            if not b_scores and not w_scores:
                continue
            b_mean = _mean(b_scores) if b_scores else None
            w_mean = _mean(w_scores) if w_scores else None
            diff = (
                w_mean - b_mean if b_mean is not None and w_mean is not None else None
            )
            rows.append(
                TierDiffRow(
                    group=group,
                    tier=tier,
                    baseline_mean=b_mean,
                    workflow_mean=w_mean,
                    diff=diff,
                )
            )
    return rows


def _mean(xs: list[float]) -> float:
    total = 0.0
    for x in xs:
        total += x
    return total / len(xs)


def agreement_report(
    group: str,
    pairs: list[ScorePair],
    baseline_tiers: list[Tier],
    workflow_tiers: list[Tier],
    thresholds: TierThresholds,
) -> AgreementReport:
    """Bundle continuous and categorical agreement for one group.

    Both tier lists must have been produced from the single thresholds
    instance passed here; its digest is recorded so reports stay
    auditable on that point.
    """
    if not (len(pairs) == len(baseline_tiers) == len(workflow_tiers)):
        raise DataError("pairs and tier lists must align one to one")
    errors = error_metrics(pairs)
    rho = spearman_rho(pairs)
    cats = categorical_metrics(baseline_tiers, workflow_tiers)
    return AgreementReport(
        group=group,
        n_pairs=errors.n,
        mae=errors.mae,
        rmse=errors.rmse,
        bias=errors.bias,
        spearman_rho=rho,
        accuracy=cats.accuracy,
        macro_f1=cats.macro_f1,
        cohen_kappa=cats.cohen_kappa,
        thresholds_digest=thresholds.digest(),
        flags=cats.flags,
    )
