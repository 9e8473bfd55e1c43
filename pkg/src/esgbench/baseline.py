"""Baseline statistics: descriptives, normality tests, quartile tiers.

The two normality tests are written out from their published algorithms
rather than delegated, so the test suite can hold them against an
independent reference implementation:

* Shapiro-Wilk follows Royston's AS R94 approximation (Applied
  Statistics 44, 1995), valid for sample sizes 3..5000.
* The omnibus K^2 test combines D'Agostino's skewness transform (1970)
  with the Anscombe-Glynn kurtosis transform (1983); K^2 = Z1^2 + Z2^2
  is referred to a chi-square with 2 degrees of freedom, whose survival
  function is exp(-x/2) exactly.

Quantiles use linear interpolation of order statistics at rank
h = (n - 1) p + 1, the same convention as numpy's default.  Quartile
thresholds split a baseline group into Weak / Average / Good / Excellent
tiers; scores tied with a threshold go to the higher tier.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import IntEnum

from scipy.special import ndtri

from .errors import DataError

ALPHA_5PCT = 0.05


class Tier(IntEnum):
    WEAK = 0
    AVERAGE = 1
    GOOD = 2
    EXCELLENT = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()


TIER_ORDER: tuple[Tier, ...] = (Tier.WEAK, Tier.AVERAGE, Tier.GOOD, Tier.EXCELLENT)

_TIER_BY_LABEL = {t.label: t for t in TIER_ORDER}


def tier_from_label(label: str) -> Tier:
    try:
        return _TIER_BY_LABEL[label]
    except KeyError:
        raise DataError(f"unknown tier label {label!r}") from None


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    std: float | None
    minimum: float
    maximum: float
    median: float
    q1: float
    q3: float


@dataclass(frozen=True)
class NormalityResult:
    test: str
    statistic: float
    p_value: float

    @property
    def normal_at_5pct(self) -> bool:
        return self.p_value > ALPHA_5PCT


@dataclass(frozen=True)
class TierThresholds:
    """Quartile cut points for one group, on the group's score axis."""

    group: str
    q1: float
    q2: float
    q3: float

    def __post_init__(self) -> None:
        if not self.q1 <= self.q2 <= self.q3:
            raise DataError(
                f"group '{self.group}': thresholds must be ordered, got "
                f"({self.q1!r}, {self.q2!r}, {self.q3!r})"
            )

    def digest(self) -> str:
        text = f"{self.group}:{self.q1!r}:{self.q2!r}:{self.q3!r}"
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def quantile(sample: list[float], p: float) -> float:
    """Linear-interpolation quantile at rank h = (n - 1) p + 1.

    The sample is sorted internally.  With integer h the quantile is the
    order statistic itself; otherwise it interpolates between the two
    neighbouring order statistics.
    """
    if not sample:
        raise DataError("quantile of an empty sample")
    if not 0.0 <= p <= 1.0:
        raise DataError(f"quantile probability must be in [0, 1], got {p!r}")
    xs = sorted(sample)
    n = len(xs)
    h = (n - 1) * p + 1.0
    i = int(math.floor(h))
    if i >= n:
        return xs[n - 1]
    return xs[i - 1] + (h - i) * (xs[i] - xs[i - 1])


def describe(sample: list[float]) -> DescriptiveStats:
    """Descriptive summary; std is the n-1 sample estimate, absent at n=1."""
    if not sample:
        raise DataError("describe needs a non-empty sample")
    n = len(sample)
    total = 0.0
    for x in sample:
        total += x
    mean = total / n
    if n > 1:
        ssd = 0.0
        for x in sample:
            d = x - mean
            ssd += d * d
        std = math.sqrt(ssd / (n - 1))
    else:
        std = None
    return DescriptiveStats(
        n=n,
        mean=mean,
        std=std,
        minimum=min(sample),
        maximum=max(sample),
        median=quantile(sample, 0.5),
        q1=quantile(sample, 0.25),
        q3=quantile(sample, 0.75),
    )


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# Royston 1995 polynomial coefficients, highest power first.
_SW_C1 = (-2.706056, 4.434685, -2.071190, -0.147981, 0.221157, 0.0)
_SW_C2 = (-3.582633, 5.682633, -1.752461, -0.293762, 0.042981, 0.0)
_SW_MU_SMALL = (-0.0006714, 0.025054, -0.39978, 0.5440)
_SW_SIGMA_SMALL = (-0.0020322, 0.062767, -0.77857, 1.3822)
_SW_MU_LARGE = (0.0038915, -0.083751, -0.31082, -1.5861)
_SW_SIGMA_LARGE = (0.0030302, -0.082676, -0.4803)


def _polyval(coeffs: tuple[float, ...], x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def shapiro_wilk(sample: list[float]) -> NormalityResult:
    """Shapiro-Wilk W test per Royston's AS R94 approximation.

    Valid for 3 <= n <= 5000; constant samples are degenerate.  The
    returned p-value is the upper-tail probability of the transformed W.
    """
    n = len(sample)
    if n < 3:
        raise DataError(f"shapiro-wilk needs n >= 3, got {n}")
    if n > 5000:
        raise DataError(f"shapiro-wilk approximation is invalid above n=5000, got {n}")
    xs = sorted(sample)
    if xs[0] == xs[-1]:
        raise DataError("shapiro-wilk is undefined for a constant sample")

    m = [float(ndtri((i - 0.375) / (n + 0.25))) for i in range(1, n + 1)]
    ssumm2 = 0.0
    for v in m:
        ssumm2 += v * v
    rsn = 1.0 / math.sqrt(n)

    a = [0.0] * n
    if n == 3:
        a[2] = math.sqrt(0.5)
        a[0] = -a[2]
    else:
        norm = math.sqrt(ssumm2)
        a_n = m[n - 1] / norm + _polyval(_SW_C1, rsn)
        if n > 5:
            a_n1 = m[n - 2] / norm + _polyval(_SW_C2, rsn)
            phi = (ssumm2 - 2.0 * m[n - 1] ** 2 - 2.0 * m[n - 2] ** 2) / (
                1.0 - 2.0 * a_n**2 - 2.0 * a_n1**2
            )
            a[n - 2] = a_n1
            a[1] = -a_n1
            lower = 2
        else:
            phi = (ssumm2 - 2.0 * m[n - 1] ** 2) / (1.0 - 2.0 * a_n**2)
            lower = 1
        a[n - 1] = a_n
        a[0] = -a_n
        root = math.sqrt(phi)
        for i in range(lower, n - lower):
            a[i] = m[i] / root

    mean = 0.0
    for x in xs:
        mean += x
    mean /= n
    num = 0.0
    ssd = 0.0
    for ai, x in zip(a, xs):
        num += ai * x
        d = x - mean
        ssd += d * d
    w = num * num / ssd
    if w > 1.0:
        w = 1.0

    if n == 3:
        p = 1.909859 * (math.asin(math.sqrt(w)) - 1.047198)
        p = min(max(p, 0.0), 1.0)
        return NormalityResult(test="shapiro-wilk", statistic=w, p_value=p)

    y = math.log(1.0 - w)
    if n <= 11:
        gamma = -2.273 + 0.459 * n
        mu = _polyval(_SW_MU_SMALL, float(n))
        sigma = math.exp(_polyval(_SW_SIGMA_SMALL, float(n)))
        z = (-math.log(gamma - y) - mu) / sigma
    else:
        ln_n = math.log(float(n))
        mu = _polyval(_SW_MU_LARGE, ln_n)
        sigma = math.exp(_polyval(_SW_SIGMA_LARGE, ln_n))
        z = (y - mu) / sigma
    p = _normal_sf(z)
    return NormalityResult(test="shapiro-wilk", statistic=w, p_value=p)


def dagostino_pearson(sample: list[float]) -> NormalityResult:
    """D'Agostino-Pearson omnibus K^2 normality test.

    Combines the skewness and kurtosis z-transforms; needs n >= 20 for
    the kurtosis approximation to hold.
    """
    n = len(sample)
    if n < 20:
        raise DataError(f"dagostino-pearson needs n >= 20, got {n}")
    mean = 0.0
    for x in sample:
        mean += x
    mean /= n
    m2 = 0.0
    m3 = 0.0
    m4 = 0.0
    for x in sample:
        d = x - mean
        d2 = d * d
        m2 += d2
        m3 += d2 * d
        m4 += d2 * d2
    m2 /= n
    m3 /= n
    m4 /= n
    if m2 == 0.0:
        raise DataError("dagostino-pearson is undefined for a constant sample")

    # Skewness transform (D'Agostino 1970).
    b1 = m3 / m2**1.5
    y = b1 * math.sqrt(((n + 1) * (n + 3)) / (6.0 * (n - 2)))
    beta2 = (
        3.0
        * (n * n + 27.0 * n - 70.0)
        * (n + 1)
        * (n + 3)
        / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9))
    )
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    if y == 0.0:
        y = 1.0
    z1 = delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1.0))

    # Kurtosis transform (Anscombe and Glynn 1983).
    b2 = m4 / (m2 * m2)
    eb2 = 3.0 * (n - 1) / (n + 1)
    varb2 = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) ** 2 * (n + 3) * (n + 5))
    x = (b2 - eb2) / math.sqrt(varb2)
    sqrtbeta1 = (
        6.0
        * (n * n - 5.0 * n + 2.0)
        / ((n + 7.0) * (n + 9.0))
        * math.sqrt((6.0 * (n + 3) * (n + 5)) / (n * (n - 2.0) * (n - 3.0)))
    )
    big_a = 6.0 + 8.0 / sqrtbeta1 * (
        2.0 / sqrtbeta1 + math.sqrt(1.0 + 4.0 / (sqrtbeta1 * sqrtbeta1))
    )
    term1 = 1.0 - 2.0 / (9.0 * big_a)
    denom = 1.0 + x * math.sqrt(2.0 / (big_a - 4.0))
    if denom == 0.0:
        raise DataError("dagostino-pearson kurtosis transform degenerate")
    ratio = (1.0 - 2.0 / big_a) / abs(denom)
    term2 = math.copysign(ratio ** (1.0 / 3.0), denom)
    z2 = (term1 - term2) / math.sqrt(2.0 / (9.0 * big_a))

    k2 = z1 * z1 + z2 * z2
    p = math.exp(-k2 / 2.0)
    return NormalityResult(test="dagostino-pearson", statistic=k2, p_value=p)


def tier_thresholds(sample: list[float], group: str) -> TierThresholds:
    """Quartile thresholds (Q1, Q2, Q3) for one group's baseline scores."""
    if len(sample) < 4:
        raise DataError(
            f"group '{group}': tier thresholds need at least 4 observations, "
            f"got {len(sample)}"
        )
    return TierThresholds(
        group=group,
        q1=quantile(sample, 0.25),
        q2=quantile(sample, 0.5),
        q3=quantile(sample, 0.75),
    )


def assign_tier(score: float, thresholds: TierThresholds) -> Tier:
    """Map a score to its quartile tier; threshold ties go upward."""
    if not math.isfinite(score):
        raise DataError(f"cannot tier a non-finite score: {score!r}")
    if score < thresholds.q1:
        return Tier.WEAK
    if score < thresholds.q2:
        return Tier.AVERAGE
    if score < thresholds.q3:
        return Tier.GOOD
    return Tier.EXCELLENT
