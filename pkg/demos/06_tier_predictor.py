"""Train the minimal tier predictor and sanity-check what it learns.

A multinomial logistic regression with L2 penalty maps question-level
indicator scores to the quartile tier induced by each seed's baseline.
It is a floor, not a contribution: the interesting question is whether
plain features predict tiers better than chance at all.
"""

from pathlib import Path

from esgbench.taxonomy import load_registry
from esgbench.workflow import dataset_from_dir, evaluate_tier_model

FIXTURE = Path(__file__).resolve().parents[1] / "data" / "fixture"

registry = load_registry(FIXTURE / "registry.json")
dataset = dataset_from_dir(FIXTURE / "sheets", registry)

seeds = [0, 1, 2, 3, 4]
report = evaluate_tier_model(dataset, seeds)
print(
    f"pillar-scoped models, lambda {report.lam}, "
    f"{len(report.seeds)} seeds, all converged: {report.all_converged}"
)
for name in ("accuracy", "macro_f1"):
    agg = report.metrics[name]
    per_seed = ", ".join(f"{v:.3f}" for v in agg.per_seed)
    print(f"  {name:<9} mean {agg.mean:.3f} +/- {agg.std:.3f}  (per seed: {per_seed})")

wide = evaluate_tier_model(dataset, seeds, widen=True)
print(
    f"\nwidened scope (every question feeds every pillar's model): "
    f"accuracy {wide.metrics['accuracy'].mean:.3f} "
    f"+/- {wide.metrics['accuracy'].std:.3f}"
)

for flag in report.flags[:3]:
    print(f"note: {flag}")
