#!/usr/bin/env python3
"""Generate the bundled synthetic survey fixture and normality samples.

Everything under data/fixture/ and tests/data/normality/ comes from this
script.  It is fully seeded: rerunning it rewrites byte-identical files.
The survey numbers are synthetic; no real survey returns, expert tier
assignments, or country assessments are reproduced here.

Survey shape per country: a latent quality in [0, 1] pushes answer mass
toward better options.  Sheets carry the messiness the cleaning stage
must handle: a ten-row preamble, lowercase country codes, whitespace
padding, parenthesized annotation rows, blank rows, an empty trailing
column, and an option row split in two with the label left blank on the
continuation line.

Normality samples are drawn until scipy agrees decisively with the
intended verdict (comfortably inside or outside the 5 percent level), so
the frozen expectations stay meaningful under small numeric drift.
"""

from __future__ import annotations

import csv
import json
import math
import random
from pathlib import Path

from scipy import stats

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "data" / "fixture"
SHEETS = FIXTURE / "sheets"
NORMALITY = ROOT / "tests" / "data" / "normality"

SEED = 20260816

COUNTRIES = [f"A{c}" for c in "ABCDEFGHIJKLMNOPQRSTUVWXYZ"] + [
    f"B{c}" for c in "ABCDEFGHIJKLMNOPQRSTUVWX"
]

YN = {"yes": 10.0, "partial": 5.0, "no": 0.0}

# (qid, type, pillar, scored options in display order, extras)
QUESTIONS = [
    ("QG1", "single", "GOV", dict(YN), {}),
    (
        "QG2",
        "single",
        "GOV",
        {"in force": 10.0, "drafted": 6.0, "planned": 3.0, "absent": 0.0},
        {},
    ),
    ("QE1", "multiple", "ENE", dict(YN), {}),
    (
        "QE2",
        "single",
        "ENE",
        {"always": 10.0, "often": 7.0, "sometimes": 4.0, "rarely": 1.0, "never": 0.0},
        {},
    ),
    (
        "QE3",
        "max_multiple",
        "ENE",
        {"renewables": 10.0, "efficiency": 7.0, "offsets": 3.0, "none": 0.0},
        {"max_choices": 2},
    ),
    (
        "DX5",
        "write_down_binned",
        "ENE",
        None,
        {
            "bins": [
                {"label": "0", "midpoint": 0.0},
                {"label": "1-5", "midpoint": 3.0},
                {"label": "6-9", "midpoint": 7.5},
                {"label": "10-50", "midpoint": 30.0},
                {"label": "51-100", "midpoint": 75.0},
                {"label": "101+", "midpoint": 120.0},
            ]
        },
    ),
    ("QB1", "single", "BIO", dict(YN), {}),
    (
        "QB2",
        "single",
        "BIO",
        {"protected": 10.0, "managed": 6.0, "monitored": 3.0, "unmanaged": 0.0},
        {},
    ),
    ("QC1", "single", "CLI", dict(YN), {}),
    ("QC2", "single", "CLI", {"adopted": 10.0, "piloting": 5.0, "none": 0.0}, {}),
]

PREAMBLE = [
    ["Aggregated survey returns"],
    ["Sheet {qid}"],
    [""],
    ["Counts are aggregated responses per option and country."],
    ["Values were pooled across respondent panels before export."],
    [""],
    ["Source: synthetic survey generator (workbench fixture)"],
    ["Contact: data steward"],
    [""],
    [""],
]


def option_counts(rng: random.Random, quality: float, n_options: int, total: int):
    """Counts per option, best option first, leaning on the quality latent."""
    centre = (1.0 - quality) * (n_options - 1)
    weights = [
        math.exp(-((i - centre) ** 2) / (0.35 * n_options)) for i in range(n_options)
    ]
    s = sum(weights)
    counts = [int(round(total * w / s)) for w in weights]
    if sum(counts) == 0:
        counts[min(int(round(centre)), n_options - 1)] = 1
    return counts


def build_tables(rng: random.Random):
    quality = {c: rng.random() for c in COUNTRIES}
    tables = {}
    for qid, _rtype, _pillar, options, extras in QUESTIONS:
        if options is None:
            ordered = [(b["label"], b["midpoint"]) for b in extras["bins"]]
            best_first = [
                lab for lab, _m in sorted(ordered, key=lambda t: -t[1])
            ]
            display = [lab for lab, _m in ordered]
        else:
            best_first = sorted(options, key=lambda lab: -options[lab])
            display = list(options)
        rows = {lab: [] for lab in display}
        dk_row = []
        for country in COUNTRIES:
            q_eff = min(1.0, max(0.0, quality[country] + rng.uniform(-0.12, 0.12)))
            total = rng.randint(18, 42)
            counts = option_counts(rng, q_eff, len(best_first), total)
            by_label = dict(zip(best_first, counts))
            for lab in display:
                rows[lab].append(by_label[lab])
            dk_row.append(rng.randint(0, 4))
        tables[qid] = {"display": display, "rows": rows, "dk": dk_row}
    return tables


def write_sheet(qid: str, table: dict) -> None:
    """Render one sheet CSV, injecting per-sheet cleaning hazards."""
    lower_codes = qid in {"QG1", "QE1", "QE3", "QB1", "QC1"}
    codes = [c.lower() if lower_codes else c for c in COUNTRIES]
    trailing_empty = qid == "QE1"
    pad = [""] if trailing_empty else []

    out: list[list[str]] = []
    for row in PREAMBLE:
        out.append([row[0].format(qid=qid)] + pad)
    if qid == "QG1":
        out.append([""] * (len(codes) + 1) + pad)
    out.append(["Criteria", *codes, *pad])
    if qid == "QG1":
        out.append([f"({qid} identifiers)", *[f"ref-{c}" for c in codes], *pad])
    if qid == "QC2":
        out.append(["(internal use)", *["x" for _ in codes], *pad])

    for lab in table["display"]:
        values = table["rows"][lab]
        if qid == "QE3" and lab == "renewables":
            first = [v // 2 for v in values]
            rest = [v - f for v, f in zip(values, first)]
            out.append([lab, *[str(v) for v in first], *pad])
            out.append(["", *[str(v) for v in rest], *pad])
            continue
        if qid == "QB2":
            out.append([f" {lab} ", *[f" {v} " for v in values], *pad])
            continue
        out.append([lab, *[str(v) for v in values], *pad])
    out.append(["dk/na", *[str(v) for v in table["dk"]], *pad])
    if qid in {"QG1", "QC2"}:
        out.append([""] * (len(codes) + 1) + pad)

    path = SHEETS / f"{qid.lower()}.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(out)


def write_registry() -> None:
    entries = []
    for qid, rtype, pillar, options, extras in QUESTIONS:
        entry: dict = {"id": qid, "type": rtype, "pillar": pillar}
        if options is None:
            entry["bins"] = extras["bins"]
        else:
            entry["options"] = options
        entry["na"] = ["dk/na"]
        entry["weight"] = 1.0
        if "max_choices" in extras:
            entry["max_choices"] = extras["max_choices"]
        entries.append(entry)
    path = FIXTURE / "registry.json"
    path.write_text(
        json.dumps({"questions": entries}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def write_manifest() -> None:
    sheets = [
        {"id": qid, "file": f"{qid.lower()}.csv"} for qid, *_ in QUESTIONS
    ]
    path = SHEETS / "sheets.json"
    path.write_text(
        json.dumps({"sheets": sheets}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def write_ratings(rng: random.Random) -> None:
    raters = ["R1", "R2", "R3"]
    items = [f"REC-{i:02d}" for i in range(1, 13)]
    header = ["rater", "item", "relevance", "actionability", "faithfulness"]
    quality = {
        (item, dim): rng.randint(1, 5) for item in items for dim in header[2:]
    }
    rows = []
    per_dim_cols: dict[str, dict[str, list]] = {
        d: {i: [] for i in items} for d in header[2:]
    }
    for rater in raters:
        for item in items:
            if rng.random() < 0.08:
                continue
            cells = []
            for dim in header[2:]:
                if rng.random() < 0.06:
                    cells.append("")
                else:
                    v = quality[(item, dim)] + rng.choice([-1, 0, 0, 0, 1])
                    v = min(5, max(1, v))
                    cells.append(str(v))
                    per_dim_cols[dim][item].append(v)
            rows.append([rater, item, *cells])
    for dim, cols in per_dim_cols.items():
        pairable = sum(1 for vals in cols.values() if len(vals) >= 2)
        assert pairable >= 2, f"{dim}: too few pairable items"
    path = FIXTURE / "ratings.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_run_ini(rng: random.Random) -> None:
    baseline = sorted(rng.sample(COUNTRIES, 20))
    text = f"""\
[input]
sheets_dir = sheets
registry = registry.json

[scoring]
scaling = true
weights = 0.1, 0.5, 0.3, 0.1

[split]
baseline_countries = {", ".join(baseline)}

[validate]
enabled = true
seeds = 0, 1, 2, 3, 4
fraction = 0.4

[ml]
enabled = false
lambda = 1.0
widen = false
max_iter = 2000
seeds = 0, 1, 2, 3, 4
fraction = 0.4

[recommend]
enabled = true
client = stub
model = advisor-stub-1
axis = ESG
policy = tier
ratings = ratings.csv

[output]
dir = out
"""
    (FIXTURE / "run.ini").write_text(text, encoding="utf-8")


def _sample_until(make, accept, start_seed: int):
    for offset in range(1000):
        rng = random.Random(start_seed + offset)
        xs = make(rng)
        sw = stats.shapiro(xs)
        k2 = stats.normaltest(xs)
        if accept(sw.pvalue, k2.pvalue):
            return xs
    raise AssertionError(f"no accepting sample found from seed {start_seed}")


def write_normality() -> None:
    both_accept = lambda p1, p2: p1 > 0.2 and p2 > 0.2
    both_reject = lambda p1, p2: p1 < 0.01 and p2 < 0.01

    samples = {}
    samples["n01"] = _sample_until(
        lambda r: [r.gauss(0.0, 1.0) for _ in range(30)], both_accept, 101
    )
    grid = [(i + 0.5) / 100.0 for i in range(100)]
    sw, k2 = stats.shapiro(grid), stats.normaltest(grid)
    assert sw.pvalue < 0.01 and k2.pvalue < 0.01
    samples["u01"] = grid
    samples["e01"] = _sample_until(
        lambda r: [r.expovariate(1.0) for _ in range(100)], both_reject, 103
    )
    samples["gov"] = _sample_until(
        lambda r: [
            r.gauss(3.0, 0.35) if i % 2 == 0 else r.gauss(8.0, 0.35)
            for i in range(40)
        ],
        both_reject,
        104,
    )
    samples["ene"] = _sample_until(
        lambda r: [math.exp(r.gauss(0.0, 0.8)) for _ in range(40)],
        both_reject,
        105,
    )
    samples["bio"] = _sample_until(
        lambda r: [
            r.gauss(0.0, 6.0) if i % 8 == 0 else r.gauss(0.0, 1.0)
            for i in range(40)
        ],
        both_reject,
        106,
    )
    samples["cli"] = _sample_until(
        lambda r: [10.0 - math.exp(r.gauss(0.0, 0.7)) for _ in range(40)],
        both_reject,
        107,
    )

    NORMALITY.mkdir(parents=True, exist_ok=True)
    for name, xs in samples.items():
        path = NORMALITY / f"{name}.csv"
        path.write_text("\n".join(repr(x) for x in xs) + "\n", encoding="utf-8")


def main() -> None:
    SHEETS.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    tables = build_tables(rng)
    for qid, *_ in QUESTIONS:
        write_sheet(qid, tables[qid])
    write_registry()
    write_manifest()
    write_ratings(random.Random(SEED + 1))
    write_run_ini(random.Random(SEED + 2))
    write_normality()
    print(f"fixture written under {FIXTURE}")
    print(f"normality samples written under {NORMALITY}")


if __name__ == "__main__":
    main()
