"""Generate rubric-governed recommendations for the weakest countries.

Countries in the Weak or Average composite tier are flagged, each gets
a grounded prompt (country, score, tier, axis, and an instruction not
to invent facts), and the deterministic stub client answers offline.
Rater rubric scores then roll up into inter-rater reliability.
"""

import configparser
import csv
from pathlib import Path

from esgbench.agreement import krippendorff_alpha
from esgbench.llm import StubClient
from esgbench.recommend import RubricScores, generate, record_rubric, select_flagged
from esgbench.taxonomy import load_registry
from esgbench.workflow import dataset_from_dir, run_split

FIXTURE = Path(__file__).resolve().parents[1] / "data" / "fixture"

parser = configparser.ConfigParser()
parser.read(FIXTURE / "run.ini")
baseline = [c.strip() for c in parser["split"]["baseline_countries"].split(",")]

registry = load_registry(FIXTURE / "registry.json")
dataset = dataset_from_dir(FIXTURE / "sheets", registry)
result = run_split(dataset, baseline)

entries = [
    (c, result.cards_workflow[c].composite, result.cards_workflow[c].composite_tier)
    for c in result.holdout
]
flags = select_flagged(entries, "ESG")
print(f"{len(flags)} of {len(result.holdout)} held-out countries flagged\n")

records = generate(flags, StubClient(model_id="advisor-stub-1"))
for record in records[:3]:
    print(f"{record.country} ({record.tier.label}, {record.feedback})")
    print(f"  {record.response_text}\n")
print(f"... plus {len(records) - 3} more, all status ok\n")

rubric_entries = []
with open(FIXTURE / "ratings.csv", newline="") as handle:
    for row in csv.DictReader(handle):
        rubric_entries.append(
            RubricScores(
                rater=row["rater"],
                item=row["item"],
                relevance=int(row["relevance"]) if row["relevance"] else None,
                actionability=int(row["actionability"]) if row["actionability"] else None,
                faithfulness=int(row["faithfulness"]) if row["faithfulness"] else None,
            )
        )
matrices = record_rubric(rubric_entries)
print("rubric reliability (ordinal alpha):")
for dimension, matrix in matrices.items():
    alpha = krippendorff_alpha(matrix)
    print(f"  {dimension:<14} {alpha:+.3f}  ({len(matrix.raters)} raters, {len(matrix.items)} items)")
