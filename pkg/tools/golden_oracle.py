#!/usr/bin/env python3
"""Independent reference run: writes the expected report files.

This script re-derives every golden report under tests/golden/run/ from
data/fixture/ without importing the package.  It follows the documented
file formats and arithmetic conventions (iteration orders, quantile
interpolation, scaling expression), and cross-checks its metric values
against scipy and scikit-learn at generation time.  The test suite then
compares the package pipeline's output byte for byte against these
files, so the two implementations must agree exactly, not just within a
tolerance.

Pinned output conventions (shared contract with the pipeline):

* CSV: comma separated, "\n" line endings, one header row; floats
  rendered with format .3f except the four normality fields, which use
  .4f on both sides; missing values render as empty cells; booleans as
  true/false; flag lists join with "; ".
* JSON: every float rounded to 12 decimal places (normality fields to 4
  first), then json.dumps(sort_keys=True, indent=2, ensure_ascii=False)
  plus a trailing newline.  recommendations.jsonl uses one compact
  sorted-keys object per line.
* Sums run left to right: options in registry order, questions in
  registry order, pillars GOV/ENE/BIO/CLI, countries in code order,
  seeds in the configured order.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import re
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path

import numpy as np
from scipy import stats as sps
from sklearn.metrics import accuracy_score, cohen_kappa_score, f1_score

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "data" / "fixture"
GOLDEN = ROOT / "tests" / "golden" / "run"

TIER_LABELS = ["Weak", "Average", "Good", "Excellent"]
PILLARS = [
    ("GOV", "Governance"),
    ("ENE", "Energy & Circular Economy"),
    ("BIO", "Biodiversity"),
    ("CLI", "Climate Strategy"),
]
GROUPS = ["GOV", "ENE", "BIO", "CLI", "ESG"]
GROUP_DISPLAY = dict(PILLARS) | {"ESG": "ESG composite"}
METRICS = ("mae", "rmse", "bias", "spearman", "accuracy", "macro_f1", "kappa")

PROMPT_TEMPLATE = (
    "You are an ESG policy analyst. Country {country} scored {score}/10 on "
    "{pillar} and sits in the {tier} tier of the benchmarked group.\n"
    "Write three specific, actionable recommendations for raising this "
    "country's standing.\n"
    "Ground every statement in the figures given above. Do not invent "
    "statistics, rankings, or facts that were not supplied; if the evidence "
    "is insufficient for a claim, say so instead."
)
STUB_TAIL = (
    "Prioritize the weakest indicators behind this score, set measurable "
    "improvement targets, and report progress against them annually."
)


# ---------------------------------------------------------------- utils

def fmt3(x):
    return "" if x is None else f"{x:.3f}"


def fmt4(x):
    return "" if x is None else f"{x:.4f}"


def round12(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round(obj, 12)
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    return obj


def dump_json(path: Path, obj) -> None:
    text = json.dumps(round12(obj), sort_keys=True, indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def half_up(x: float) -> str:
    return str(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


# ------------------------------------------------------------- rng copy

class SplitMix64:
    """Reference splitmix64 generator (public-domain algorithm)."""

    MASK = (1 << 64) - 1
    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int) -> None:
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return (z ^ (z >> 31)) & self.MASK

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]


def split_plan(countries: list[str], seed: int, fraction: float):
    ordered = sorted(countries)
    SplitMix64(seed).shuffle(ordered)
    k = max(int(math.floor(fraction * len(countries) + 0.5)), 4)
    return sorted(ordered[:k]), sorted(ordered[k:])


# ------------------------------------------------------------- cleaning

_PAREN = re.compile(r"\(.*\)", re.DOTALL)


def clean_sheet_file(path: Path):
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    body = rows[10:]
    width = max(len(r) for r in body)
    grid = []
    for r in body:
        cells = [(c.strip() or None) for c in r]
        cells += [None] * (width - len(cells))
        grid.append(cells)
    grid = [r for r in grid if any(c is not None for c in r)]
    assert grid, f"{path}: nothing after cleaning"
    assert any(r[0] is not None for r in grid), f"{path}: unanchored"
    keep = [j for j in range(width) if any(r[j] is not None for r in grid)]
    grid = [[r[j] for j in keep] for r in grid]
    grid = [
        r
        for r in grid
        if not (r[0] is not None and _PAREN.fullmatch(r[0]))
    ]
    header, data = grid[0], grid[1:]
    codes = [c.upper() for c in header[1:]]
    assert all(codes) and len(set(codes)) == len(codes), f"{path}: bad header"
    assert data and data[0][0] is not None, f"{path}: unanchored data"
    criteria = []
    last = None
    values = []
    for r in data:
        label = r[0] if r[0] is not None else last
        last = label
        criteria.append(label)
        row = []
        for cell in r[1:]:
            assert cell is not None and "," not in cell, f"{path}: bad cell {cell!r}"
            v = float(cell)
            assert math.isfinite(v) and v >= 0.0
            row.append(v)
        values.append(row)
    return criteria, codes, values


# ------------------------------------------------------------ registry

def load_registry(path: Path):
    payload = json.loads(path.read_text(encoding="utf-8"))
    questions = []
    for entry in payload["questions"]:
        if "bins" in entry:
            mids = [float(b["midpoint"]) for b in entry["bins"]]
            mn, mx = mids[0], mids[-1]
            options = {
                str(b["label"]): 10.0 * (float(b["midpoint"]) - mn) / (mx - mn)
                for b in entry["bins"]
            }
        else:
            options = {str(k): float(v) for k, v in entry["options"].items()}
        questions.append(
            {
                "id": entry["id"],
                "pillar": entry["pillar"],
                "options": options,
                "na": list(entry.get("na", [])),
                "weight": float(entry.get("weight", 1.0)),
            }
        )
    return questions


# ----------------------------------------------------------- arithmetic

def quantile(sample: list[float], p: float) -> float:
    xs = sorted(sample)
    n = len(xs)
    h = (n - 1) * p + 1.0
    i = int(math.floor(h))
    if i >= n:
        return xs[n - 1]
    return xs[i - 1] + (h - i) * (xs[i] - xs[i - 1])


def assign_tier(score: float, q1: float, q2: float, q3: float) -> int:
    if score < q1:
        return 0
    if score < q2:
        return 1
    if score < q3:
        return 2
    return 3


def thresholds_digest(group: str, q1: float, q2: float, q3: float) -> str:
    text = f"{group}:{q1!r}:{q2!r}:{q3!r}"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def plain_mean(xs):
    total = 0.0
    for x in xs:
        total += x
    return total / len(xs)


def plain_std(xs, mean):
    ssd = 0.0
    for x in xs:
        d = x - mean
        ssd += d * d
    return math.sqrt(ssd / (len(xs) - 1))


def scale(x: float, mn: float, mx: float, clamp: bool) -> float:
    if mn == mx:
        return (1.0 + 10.0) / 2.0
    span = mx - mn
    y = 1.0 + (10.0 - 1.0) * (x - mn) / span
    if clamp:
        if y < 1.0:
            return 1.0
        if y > 10.0:
            return 10.0
    return y


# -------------------------------------------------------------- metrics

def error_stats(ref, wf):
    n = len(ref)
    abs_sum = sq_sum = diff_sum = 0.0
    for b, w in zip(ref, wf):
        d = w - b
        abs_sum += abs(d)
        sq_sum += d * d
        diff_sum += d
    return abs_sum / n, math.sqrt(sq_sum / n), diff_sum / n


def spearman(ref, wf):
    rx = sps.rankdata(ref).tolist()
    ry = sps.rankdata(wf).tolist()
    n = len(ref)
    mx = my = 0.0
    for a, b in zip(rx, ry):
        mx += a
        my += b
    mx /= n
    my /= n
    sxy = sxx = syy = 0.0
    for a, b in zip(rx, ry):
        da, db = a - mx, b - my
        sxy += da * db
        sxx += da * da
        syy += db * db
    rho = sxy / math.sqrt(sxx * syy)
    check = sps.spearmanr(ref, wf).statistic
    assert abs(rho - check) < 1e-12, (rho, check)
    return rho


def categorical(a, b):
    n = len(a)
    agree = sum(1 for x, y in zip(a, b) if x == y)
    accuracy = agree / n
    flags = []
    f1_total = 0.0
    for cls in range(4):
        tp = sum(1 for x, y in zip(a, b) if x == cls and y == cls)
        fp = sum(1 for x, y in zip(a, b) if y == cls and x != cls)
        fn = sum(1 for x, y in zip(a, b) if x == cls and y != cls)
        if tp == 0 and fp == 0 and fn == 0:
            flags.append(
                f"class '{TIER_LABELS[cls]}' absent from both sides; F1 set to 0"
            )
            continue
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        if precision + recall > 0:
            f1_total += 2.0 * precision * recall / (precision + recall)
    macro_f1 = f1_total / 4
    p_e = 0.0
    for cls in range(4):
        ca = sum(1 for x in a if x == cls)
        cb = sum(1 for y in b if y == cls)
        p_e += (ca / n) * (cb / n)
    if p_e == 1.0:
        kappa = 1.0 if accuracy == 1.0 else 0.0
        flags.append("kappa degenerate: expected agreement is 1")
    else:
        kappa = (accuracy - p_e) / (1.0 - p_e)

    assert abs(accuracy - accuracy_score(a, b)) < 1e-12
    sk_f1 = f1_score(a, b, labels=[0, 1, 2, 3], average="macro", zero_division=0)
    assert abs(macro_f1 - sk_f1) < 1e-9, (macro_f1, sk_f1)
    if p_e != 1.0:
        sk_k = cohen_kappa_score(a, b, labels=[0, 1, 2, 3])
        assert abs(kappa - sk_k) < 1e-9, (kappa, sk_k)
    return accuracy, macro_f1, kappa, flags


def krippendorff_ordinal(columns: list[list[int]]) -> float:
    """Brute-force pairable-pairs route (vs the coincidence-matrix route)."""
    pairable = [col for col in columns if len(col) >= 2]
    assert len(pairable) >= 2
    cats = sorted({v for col in pairable for v in col})
    idx = {c: i for i, c in enumerate(cats)}
    margins = [0.0] * len(cats)
    for col in pairable:
        for v in col:
            margins[idx[v]] += 1.0
    total = 0.0
    for m in margins:
        total += m

    def delta2(ci, cj):
        if ci == cj:
            return 0.0
        lo, hi = min(ci, cj), max(ci, cj)
        s = 0.0
        for g in range(lo, hi + 1):
            s += margins[g]
        s -= (margins[lo] + margins[hi]) / 2.0
        return s * s

    d_o = 0.0
    for col in pairable:
        m_u = len(col)
        for i_i, vi in enumerate(col):
            for j_j, vj in enumerate(col):
                if i_i != j_j:
                    d_o += delta2(idx[vi], idx[vj]) / (m_u - 1)
    d_o /= total
    d_e = 0.0
    for i_i in range(len(cats)):
        for j_j in range(len(cats)):
            if i_i != j_j:
                d_e += margins[i_i] * margins[j_j] * delta2(i_i, j_j)
    d_e /= total * (total - 1.0)
    if d_e == 0.0:
        return 1.0
    return 1.0 - d_o / d_e


# ------------------------------------------------------------ the run

def main() -> None:
    cfg = configparser.ConfigParser()
    cfg.read(FIXTURE / "run.ini")
    weights = [float(w.strip()) for w in cfg["scoring"]["weights"].split(",")]
    baseline_conf = sorted(
        c.strip() for c in cfg["split"]["baseline_countries"].split(",")
    )
    seeds = [int(s.strip()) for s in cfg["validate"]["seeds"].split(",")]
    fraction = float(cfg["validate"]["fraction"])
    model_id = cfg["recommend"]["model"]

    registry = load_registry(FIXTURE / "registry.json")
    manifest = json.loads((FIXTURE / "sheets" / "sheets.json").read_text())

    GOLDEN.mkdir(parents=True, exist_ok=True)
    (GOLDEN / "clean").mkdir(exist_ok=True)

    # Clean sheets, write clean/*.csv, and fold distributions.
    freqs: dict[str, dict[str, dict[str, float]]] = {}
    countries: list[str] = []
    for entry in manifest["sheets"]:
        qid = entry["id"]
        criteria, codes, values = clean_sheet_file(FIXTURE / "sheets" / entry["file"])
        write_csv(
            GOLDEN / "clean" / f"{qid}.csv",
            ["criteria", *codes],
            [
                [lab, *[format(v, "g") for v in row]]
                for lab, row in zip(criteria, values)
            ],
        )
        per = {c: {} for c in codes}
        for lab, row in zip(criteria, values):
            for c, v in zip(codes, row):
                per[c][lab] = per[c].get(lab, 0.0) + v
        freqs[qid] = per
        countries = sorted(codes)
    qids = [q["id"] for q in registry]

    # Raw indicator and pillar scores.
    indicators: dict[str, dict[str, float]] = {}
    raw: dict[str, dict[str, float]] = {}
    for c in countries:
        ind = {}
        for q in registry:
            f = freqs[q["id"]][c]
            num = den = 0.0
            for label, s in q["options"].items():
                w = f.get(label, 0.0)
                num += w * s
                den += w
            ind[q["id"]] = num / den
        indicators[c] = ind
        raw[c] = {}
        for code, _disp in PILLARS:
            num = den = 0.0
            for q in registry:
                if q["pillar"] == code:
                    num += q["weight"] * ind[q["id"]]
                    den += q["weight"]
            raw[c][code] = num / den

    write_csv(
        GOLDEN / "scores_raw.csv",
        ["country", *qids, "gov_raw", "ene_raw", "bio_raw", "cli_raw"],
        [
            [
                c,
                *[fmt3(indicators[c][q]) for q in qids],
                *[fmt3(raw[c][g]) for g, _ in PILLARS],
            ]
            for c in countries
        ],
    )
    dump_json(
        GOLDEN / "scores_raw.json",
        {
            c: {"indicators": indicators[c], "raw_pillars": raw[c]}
            for c in countries
        },
    )

    # One full split given a baseline list; returns everything downstream.
    def run_split(base: list[str]):
        hold = [c for c in countries if c not in set(base)]
        params = {}
        ref_params = {}
        for code, _disp in PILLARS:
            bvals = [raw[c][code] for c in base]
            params[code] = (min(bvals), max(bvals))
            avals = [raw[c][code] for c in countries]
            ref_params[code] = (min(avals), max(avals))

        def card(c, par, clamp):
            scores = {
                code: scale(raw[c][code], par[code][0], par[code][1], clamp)
                for code, _ in PILLARS
            }
            total = 0.0
            for w, (code, _) in zip(weights, PILLARS):
                total += w * scores[code]
            scores["ESG"] = total
            return scores

        cards_b = {c: card(c, params, False) for c in base}
        cards_w = {c: card(c, params, True) for c in hold}
        cards_r = {c: card(c, ref_params, True) for c in hold}

        thr = {}
        for g in GROUPS:
            sample = [cards_b[c][g] for c in base]
            thr[g] = (
                quantile(sample, 0.25),
                quantile(sample, 0.5),
                quantile(sample, 0.75),
            )
        tiers = {}
        for name, cards in (("b", cards_b), ("w", cards_w), ("r", cards_r)):
            tiers[name] = {
                c: {g: assign_tier(cards[c][g], *thr[g]) for g in GROUPS}
                for c in cards
            }
        return hold, params, ref_params, cards_b, cards_w, cards_r, thr, tiers

    def agreement_rows(hold, cards_w, cards_r, thr, tiers):
        out = {}
        for g in GROUPS:
            ref_v = [cards_r[c][g] for c in hold]
            wf_v = [cards_w[c][g] for c in hold]
            mae, rmse, bias = error_stats(ref_v, wf_v)
            rho = spearman(ref_v, wf_v)
            acc, f1, kappa, flags = categorical(
                [tiers["r"][c][g] for c in hold], [tiers["w"][c][g] for c in hold]
            )
            out[g] = {
                "n_pairs": len(hold),
                "mae": mae,
                "rmse": rmse,
                "bias": bias,
                "spearman_rho": rho,
                "accuracy": acc,
                "macro_f1": f1,
                "cohen_kappa": kappa,
                "thresholds_digest": thresholds_digest(g, *thr[g]),
                "flags": flags,
            }
        return out

    # Main split from the configured baseline list.
    hold, params, ref_params, cards_b, cards_w, cards_r, thr, tiers = run_split(
        baseline_conf
    )

    # Baseline-side descriptives and normality.
    stats_rows = []
    stats_json = {}
    for g in GROUPS:
        sample = [cards_b[c][g] for c in baseline_conf]
        n = len(sample)
        mean = plain_mean(sample)
        std = plain_std(sample, mean)
        med = quantile(sample, 0.5)
        q1 = quantile(sample, 0.25)
        q3 = quantile(sample, 0.75)
        sw = sps.shapiro(sample)
        sw_w, sw_p = round(float(sw.statistic), 4), round(float(sw.pvalue), 4)
        rec = {
            "n": n,
            "mean": mean,
            "std": std,
            "min": min(sample),
            "max": max(sample),
            "median": med,
            "q1": q1,
            "q3": q3,
            "shapiro": {
                "statistic": sw_w,
                "p_value": sw_p,
                "normal_at_5pct": float(sw.pvalue) > 0.05,
            },
            "dagostino": None,
        }
        row = [
            g,
            n,
            fmt3(mean),
            fmt3(std),
            fmt3(min(sample)),
            fmt3(max(sample)),
            fmt3(med),
            fmt3(q1),
            fmt3(q3),
            fmt4(sw_w),
            fmt4(sw_p),
            str(float(sw.pvalue) > 0.05).lower(),
        ]
        if n >= 20:
            k2 = sps.normaltest(sample)
            k2_s, k2_p = round(float(k2.statistic), 4), round(float(k2.pvalue), 4)
            rec["dagostino"] = {
                "statistic": k2_s,
                "p_value": k2_p,
                "normal_at_5pct": float(k2.pvalue) > 0.05,
            }
            row += [fmt4(k2_s), fmt4(k2_p), str(float(k2.pvalue) > 0.05).lower()]
        else:
            row += ["", "", ""]
        stats_rows.append(row)
        stats_json[g] = rec
    write_csv(
        GOLDEN / "baseline_stats.csv",
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
    dump_json(GOLDEN / "baseline_stats.json", stats_json)

    # Thresholds.
    write_csv(
        GOLDEN / "tier_thresholds.csv",
        ["group", "q1", "q2", "q3", "digest"],
        [
            [g, fmt3(thr[g][0]), fmt3(thr[g][1]), fmt3(thr[g][2]),
             thresholds_digest(g, *thr[g])]
            for g in GROUPS
        ],
    )
    dump_json(
        GOLDEN / "tier_thresholds.json",
        {
            g: {
                "q1": thr[g][0],
                "q2": thr[g][1],
                "q3": thr[g][2],
                "digest": thresholds_digest(g, *thr[g]),
            }
            for g in GROUPS
        },
    )

    # Scorecards: baseline, workflow, reference blocks.
    card_rows = []
    cards_json = {"baseline": {}, "workflow": {}, "reference": {}}
    for role, cards, tier_key, members in (
        ("baseline", cards_b, "b", baseline_conf),
        ("workflow", cards_w, "w", hold),
        ("reference", cards_r, "r", hold),
    ):
        for c in members:
            card_rows.append(
                [
                    c,
                    role,
                    *[fmt3(cards[c][g]) for g in GROUPS],
                    *[TIER_LABELS[tiers[tier_key][c][g]] for g in GROUPS],
                ]
            )
            cards_json[role][c] = {
                "scores": {g: cards[c][g] for g in GROUPS},
                "tiers": {g: TIER_LABELS[tiers[tier_key][c][g]] for g in GROUPS},
            }
    write_csv(
        GOLDEN / "scorecards.csv",
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
    dump_json(GOLDEN / "scorecards.json", cards_json)

    # Per-tier overlay table.
    diff_rows = []
    for g in GROUPS:
        for t in range(4):
            b_scores = [
                cards_b[c][g] for c in baseline_conf if tiers["b"][c][g] == t
            ]
            w_scores = [cards_w[c][g] for c in hold if tiers["w"][c][g] == t]
            if not b_scores and not w_scores:
                continue
            b_mean = plain_mean(b_scores) if b_scores else None
            w_mean = plain_mean(w_scores) if w_scores else None
            diff = w_mean - b_mean if b_mean is not None and w_mean is not None else None
            diff_rows.append(
                [
                    GROUP_DISPLAY[g],
                    TIER_LABELS[t],
                    fmt3(b_mean),
                    fmt3(w_mean),
                    fmt3(diff),
                ]
            )
    write_csv(
        GOLDEN / "tier_diffs.csv",
        ["group", "classification", "baseline", "workflow", "diff"],
        diff_rows,
    )

    # Agreement on the main split.
    agree = agreement_rows(hold, cards_w, cards_r, thr, tiers)
    write_csv(
        GOLDEN / "agreement.csv",
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
                g,
                agree[g]["n_pairs"],
                fmt3(agree[g]["mae"]),
                fmt3(agree[g]["rmse"]),
                fmt3(agree[g]["bias"]),
                fmt3(agree[g]["spearman_rho"]),
                fmt3(agree[g]["accuracy"]),
                fmt3(agree[g]["macro_f1"]),
                fmt3(agree[g]["cohen_kappa"]),
                agree[g]["thresholds_digest"],
                "; ".join(agree[g]["flags"]),
            ]
            for g in GROUPS
        ],
    )
    dump_json(GOLDEN / "agreement.json", agree)

    # RRSSV over the configured seeds.
    metric_keys = [f"{g.lower()}_{m}" for g in GROUPS for m in METRICS]
    per_seed = []
    plans = []
    for seed in seeds:
        base_s, _hold_s = split_plan(countries, seed, fraction)
        plans.append({"seed": seed, "baseline": base_s})
        h, _p, _rp, _cb, cw, cr, th, ti = run_split(base_s)
        a = agreement_rows(h, cw, cr, th, ti)
        flat = {}
        for g in GROUPS:
            low = g.lower()
            flat[f"{low}_mae"] = a[g]["mae"]
            flat[f"{low}_rmse"] = a[g]["rmse"]
            flat[f"{low}_bias"] = a[g]["bias"]
            flat[f"{low}_spearman"] = a[g]["spearman_rho"]
            flat[f"{low}_accuracy"] = a[g]["accuracy"]
            flat[f"{low}_macro_f1"] = a[g]["macro_f1"]
            flat[f"{low}_kappa"] = a[g]["cohen_kappa"]
        per_seed.append(flat)
    write_csv(
        GOLDEN / "rrssv_per_seed.csv",
        ["seed", *metric_keys],
        [
            [seed, *[fmt3(flat[k]) for k in metric_keys]]
            for seed, flat in zip(seeds, per_seed)
        ],
    )
    agg = {}
    for key in metric_keys:
        values = [flat[key] for flat in per_seed]
        mean = plain_mean(values)
        std = plain_std(values, mean)
        agg[key] = {"mean": mean, "std": std, "per_seed": values}
    write_csv(
        GOLDEN / "rrssv_summary.csv",
        ["metric", "mean", "std"],
        [[k, fmt3(agg[k]["mean"]), fmt3(agg[k]["std"])] for k in metric_keys],
    )
    dump_json(
        GOLDEN / "rrssv.json",
        {
            "seeds": seeds,
            "fraction": fraction,
            "n_countries": len(countries),
            "baseline_size": len(plans[0]["baseline"]),
            "plans": plans,
            "metrics": agg,
        },
    )

    # Recommendations on the ESG axis, tier policy, stub client.
    flagged = [
        (tiers["w"][c]["ESG"], cards_w[c]["ESG"], c)
        for c in hold
        if tiers["w"][c]["ESG"] <= 1
    ]
    flagged.sort()
    lines = []
    for tier, score, c in flagged:
        prompt = PROMPT_TEMPLATE.format(
            country=c,
            score=half_up(score),
            tier=TIER_LABELS[tier],
            pillar="the overall ESG composite",
        )
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]
        record = {
            "country": c,
            "group": "ESG",
            "score": score,
            "tier": TIER_LABELS[tier],
            "feedback": f"Scored only {half_up(score)}/10.",
            "prompt": prompt,
            "status": "ok",
            "response_text": f"[stub {digest}] {STUB_TAIL}",
            "model_id": model_id,
            "retries": 0,
            "latency_s": 0.0,
            "timestamp_utc": "1970-01-01T00:00:00Z",
            "error": None,
        }
        lines.append(json.dumps(round12(record), sort_keys=True, ensure_ascii=False))
    (GOLDEN / "recommendations.jsonl").write_text(
        "".join(line + "\n" for line in lines), encoding="utf-8"
    )

    # Rubric reliability from the bundled ratings.
    with (FIXTURE / "ratings.csv").open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        raters: list[str] = []
        items: list[str] = []
        cells: dict[tuple[str, str], dict[str, int | None]] = {}
        for row in reader:
            r, it = row["rater"], row["item"]
            if r not in raters:
                raters.append(r)
            if it not in items:
                items.append(it)
            cells[(r, it)] = {
                dim: (int(row[dim]) if row[dim].strip() else None)
                for dim in ("relevance", "actionability", "faithfulness")
            }
    alpha = {}
    for dim in ("relevance", "actionability", "faithfulness"):
        columns = []
        for it in items:
            col = []
            for r in raters:
                v = cells.get((r, it), {}).get(dim)
                if v is not None:
                    col.append(v)
            columns.append(col)
        alpha[dim] = krippendorff_ordinal(columns)
    dump_json(
        GOLDEN / "rubric_alpha.json",
        {"n_raters": len(raters), "n_items": len(items), "alpha": alpha},
    )

    n_files = len(list(GOLDEN.rglob("*.*")))
    print(f"wrote {n_files} golden files under {GOLDEN}")
    print(f"flagged for recommendations: {[c for _, _, c in flagged]}")
    print(f"alpha: { {k: round(v, 4) for k, v in alpha.items()} }")


if __name__ == "__main__":
    main()
