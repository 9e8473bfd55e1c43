"""Establish quartile tiers on a baseline split and classify the rest.

The designated baseline countries are scored and min-max scaled to
1..10; their quartiles become the Weak/Average/Good/Excellent cut
points.  Held-out countries are then scaled with the frozen baseline
parameters and classified against those fixed thresholds.
"""

import configparser
from pathlib import Path

from esgbench.baseline import Tier, describe
from esgbench.taxonomy import GROUP_ORDER, load_registry
from esgbench.workflow import dataset_from_dir, run_split

FIXTURE = Path(__file__).resolve().parents[1] / "data" / "fixture"

parser = configparser.ConfigParser()
parser.read(FIXTURE / "run.ini")
baseline = [c.strip() for c in parser["split"]["baseline_countries"].split(",")]

registry = load_registry(FIXTURE / "registry.json")
dataset = dataset_from_dir(FIXTURE / "sheets", registry)
result = run_split(dataset, baseline)
print(f"baseline {len(result.baseline)} countries, holdout {len(result.holdout)}\n")

print("tier thresholds per group (q1 / q2 / q3):")
for group in GROUP_ORDER:
    t = result.thresholds[group]
    print(f"  {group:<4} {t.q1:6.3f} / {t.q2:6.3f} / {t.q3:6.3f}   digest {t.digest()}")

sample = [result.cards_baseline[c].composite for c in result.baseline]
stats = describe(sample)
print(
    f"\nbaseline composite: mean {stats.mean:.3f}, std {stats.std:.3f}, "
    f"range {stats.minimum:.3f}..{stats.maximum:.3f}"
)

counts = {tier: 0 for tier in Tier}
for country in result.holdout:
    counts[result.cards_workflow[country].composite_tier] += 1
print("\nheld-out composite tier counts:")
for tier, count in counts.items():
    print(f"  {tier.label:<10} {count}")
