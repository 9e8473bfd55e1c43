#!/usr/bin/env python3
"""Freeze reference normality-test values for the bundled samples.

Reads every sample under tests/data/normality/ and records scipy's
shapiro and normaltest results in expected.json.  The test suite holds
the package's own implementations of both tests against these frozen
numbers, so regressions show up even if scipy's internals change or the
samples are regenerated without rerunning this script.
"""

from __future__ import annotations

import json
from pathlib import Path

from scipy import stats

NORMALITY = Path(__file__).resolve().parent.parent / "tests" / "data" / "normality"


def main() -> None:
    expected = {}
    for path in sorted(NORMALITY.glob("*.csv")):
        xs = [float(line) for line in path.read_text().splitlines() if line.strip()]
        sw = stats.shapiro(xs)
        record = {
            "n": len(xs),
            "shapiro_w": float(sw.statistic),
            "shapiro_p": float(sw.pvalue),
        }
        if len(xs) >= 20:
            k2 = stats.normaltest(xs)
            record["dagostino_k2"] = float(k2.statistic)
            record["dagostino_p"] = float(k2.pvalue)
        expected[path.stem] = record
    out = NORMALITY / "expected.json"
    out.write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} with {len(expected)} samples")


if __name__ == "__main__":
    main()
