"""Quantify baseline/workflow agreement on the held-out countries.

Each held-out country is scored twice: once with the baseline-frozen
scaling (workflow route) and once with scaling refit on everyone
(reference route).  Continuous agreement uses MAE/RMSE/bias and rank
correlation; categorical agreement uses accuracy, macro-F1, and kappa
on the assigned tiers.
"""

import configparser
from pathlib import Path

from esgbench.taxonomy import load_registry
from esgbench.workflow import agreement_reports, dataset_from_dir, run_split, tier_diff_rows

FIXTURE = Path(__file__).resolve().parents[1] / "data" / "fixture"

parser = configparser.ConfigParser()
parser.read(FIXTURE / "run.ini")
baseline = [c.strip() for c in parser["split"]["baseline_countries"].split(",")]

registry = load_registry(FIXTURE / "registry.json")
dataset = dataset_from_dir(FIXTURE / "sheets", registry)
result = run_split(dataset, baseline)

print("group  n   mae    rmse   bias    rho    acc    f1     kappa")
for report in agreement_reports(result):
    print(
        f"{report.group:<5} {report.n_pairs:>3} "
        f"{report.mae:6.3f} {report.rmse:6.3f} {report.bias:+6.3f} "
        f"{report.spearman_rho:+6.3f} {report.accuracy:6.3f} "
        f"{report.macro_f1:6.3f} {report.cohen_kappa:+6.3f}"
    )
    for flag in report.flags:
        print(f"      note: {flag}")

print("\nper-tier mean composite, baseline countries vs held-out countries:")
for row in tier_diff_rows(result):
    if row.group != "ESG":
        continue
    base = "-" if row.baseline_mean is None else f"{row.baseline_mean:.3f}"
    wf = "-" if row.workflow_mean is None else f"{row.workflow_mean:.3f}"
    diff = "-" if row.diff is None else f"{row.diff:+.3f}"
    print(f"  {row.tier.label:<10} baseline {base:>6}  workflow {wf:>6}  diff {diff}")
