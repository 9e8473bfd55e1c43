"""Read one aggregated survey sheet and walk through the cleaning steps.

Each sheet holds one question: option labels down the side, country
codes across the top, response counts in the cells.  Cleaning drops the
preamble block, forward-fills split criterion labels, removes
parenthesized annotation rows, and validates every count.
"""

from pathlib import Path

from esgbench.ingest import PREAMBLE_ROWS, clean_sheet, load_sheet

FIXTURE = Path(__file__).resolve().parents[1] / "data" / "fixture"

raw = load_sheet(FIXTURE / "sheets" / "qg1.csv")
print(f"sheet id        : {raw.sheet_id}")
print(f"rows on disk    : {len(raw.rows)} (first {PREAMBLE_ROWS} are preamble)")

table = clean_sheet(raw)
print(f"criteria        : {', '.join(table.criteria)}")
print(f"countries       : {len(table.countries)} ({table.countries[0]} .. {table.countries[-1]})")

print("\nfirst three countries, all criteria:")
header = " " * 14 + "".join(f"{c:>8}" for c in table.countries[:3])
print(header)
for label, row in zip(table.criteria, table.values):
    cells = "".join(f"{v:8.0f}" for v in row[:3])
    print(f"{label:<14}{cells}")

totals = [sum(row[i] for row in table.values) for i in range(3)]
print("\ncolumn totals (responses per country):", [f"{t:.0f}" for t in totals])
