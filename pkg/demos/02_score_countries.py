"""Score every country: indicators, pillar means, weighted composite.

Indicator scores are response-frequency-weighted option scores with
don't-know mass renormalized away.  Pillar scores average a pillar's
indicators; the composite weights the four pillars 0.1/0.5/0.3/0.1.
"""

from pathlib import Path

from esgbench.scoring import PillarWeights, composite_esg, indicator_score, pillar_score
from esgbench.taxonomy import PILLAR_ORDER, load_registry
from esgbench.workflow import dataset_from_dir

FIXTURE = Path(__file__).resolve().parents[1] / "data" / "fixture"

registry = load_registry(FIXTURE / "registry.json")
dataset = dataset_from_dir(FIXTURE / "sheets", registry)
print(f"{len(dataset.countries)} countries, {len(dataset.question_ids())} questions\n")

country = dataset.countries[0]
weights = PillarWeights()
print(f"worked example for country {country}:")

raw_pillars = {}
for pillar in PILLAR_ORDER:
    specs = registry.questions_for(pillar)
    scores = {}
    for spec in specs:
        dist = dataset.distributions[(country, spec.question_id)]
        scores[spec.question_id] = indicator_score(dist, spec)
    raw_pillars[pillar] = pillar_score(list(scores.values()))
    detail = ", ".join(f"{q}={s:.3f}" for q, s in scores.items())
    print(f"  {pillar.display:<28} {raw_pillars[pillar]:.3f}  ({detail})")

composite = composite_esg(raw_pillars, weights)
parts = " + ".join(
    f"{weights[p]:.1f}*{raw_pillars[p]:.3f}" for p in PILLAR_ORDER
)
print(f"\ncomposite = {parts} = {composite:.3f}")
