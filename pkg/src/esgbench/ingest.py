"""Reading and cleaning aggregated survey sheets.

Exports arrive as CSV files, one sheet per question, with a fixed
layout: ten rows of preamble, then a header row of country codes, then
one row per answer option.  Cleaning is rule-driven and deterministic:

1. the first ten rows are skipped outright;
2. cells are stripped; whitespace-only cells count as absent;
3. rows whose every cell is absent are dropped, then columns whose
   every cell is absent are dropped (a fully absent criteria column is
   an unanchored-criteria error, not a silent shift);
4. rows whose criteria cell is nothing but parenthesized text, such as
   "(QA5 identifiers)", are dropped as identifier rows -- parentheses
   inside a longer label are left alone;
5. the first surviving row is the country header; everything after it
   is data, with the criteria column forward-filled so option rows
   under a merged label inherit it.

Anything that violates the layout (missing numbers, unparseable text,
thousands separators, negatives) is an error naming the sheet; this
module never repairs or drops data silently beyond the rules above.

A `sheets.json` manifest next to the sheets pins the sheet list and
their order when present; otherwise *.csv files are taken in sorted
filename order with the stem as the sheet id.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import ConfigError, DataError, IngestError

PREAMBLE_ROWS = 10
MANIFEST_NAME = "sheets.json"

_PARENTHESIZED = re.compile(r"^\(.*\)$", re.DOTALL)


@dataclass
class RawSheet:
    """One sheet exactly as read: a grid of raw cell strings."""

    sheet_id: str
    path: Path | None
    rows: list[list[str]]


@dataclass(frozen=True)
class CleanTable:
    """The cleaned view of one sheet.

    criteria holds one option label per data row (forward-filled);
    countries holds the header codes; values is the numeric matrix,
    row-major, aligned with criteria x countries.
    """

    sheet_id: str
    criteria: tuple[str, ...]
    countries: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.criteria):
            raise DataError(
                f"sheet '{self.sheet_id}': {len(self.values)} value rows for "
                f"{len(self.criteria)} criteria"
            )
        for row in self.values:
            if len(row) != len(self.countries):
                raise DataError(
                    f"sheet '{self.sheet_id}': ragged value row of width "
                    f"{len(row)}, expected {len(self.countries)}"
                )


def load_sheet(path: str | Path, sheet_id: str | None = None) -> RawSheet:
    path = Path(path)
    if sheet_id is None:
        sheet_id = path.stem
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [list(row) for row in csv.reader(fh)]
    except FileNotFoundError:
        raise IngestError(f"sheet file not found: {path}") from None
    except OSError as exc:
        raise IngestError(f"cannot read sheet file {path}: {exc}") from None
    return RawSheet(sheet_id=sheet_id, path=path, rows=rows)


def _manifest_entries(directory: Path) -> list[tuple[str, Path]]:
    manifest_path = directory / MANIFEST_NAME
    if manifest_path.exists():
        try:
            payload = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{manifest_path} is not valid JSON: {exc}") from None
        sheets = payload.get("sheets")
        if not isinstance(sheets, list) or not sheets:
            raise ConfigError(f"{manifest_path} must list sheets under 'sheets'")
        entries = []
        for item in sheets:
            if not isinstance(item, dict) or "id" not in item or "file" not in item:
                raise ConfigError(
                    f"{manifest_path}: each sheet entry needs 'id' and 'file'"
                )
            entries.append((str(item["id"]), directory / str(item["file"])))
        return entries
    files = sorted(directory.glob("*.csv"))
    if not files:
        raise IngestError(f"no sheet files found in {directory}")
    return [(f.stem, f) for f in files]


def iter_sheet_dir(directory: str | Path) -> Iterator[RawSheet]:
    """Yield raw sheets one at a time, manifest order when present.

    Lazy by design: the pipeline folds each sheet into its accumulators
    before the next is read, so peak memory stays bounded by the largest
    single sheet.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestError(f"sheet directory not found: {directory}")
    for sheet_id, path in _manifest_entries(directory):
        yield load_sheet(path, sheet_id)


def load_sheet_dir(directory: str | Path) -> list[RawSheet]:
    """Eager variant of iter_sheet_dir for interactive use."""
    return list(iter_sheet_dir(directory))


def forward_fill_criteria(cells: list[str | None]) -> list[str]:
    """Fill absent criteria cells with the nearest earlier label.

    The first cell anchors the column and must be present.
    """
    if not cells or cells[0] is None:
        raise DataError("unanchored criteria column: first criteria cell is absent")
    filled: list[str] = []
    current = cells[0]
    for cell in cells:
        if cell is not None:
            current = cell
        filled.append(current)
    return filled


def _normalize(rows: list[list[str]]) -> list[list[str | None]]:
    width = max((len(r) for r in rows), default=0)
    grid: list[list[str | None]] = []
    for row in rows:
        cells: list[str | None] = []
        for i in range(width):
            text = row[i].strip() if i < len(row) else ""
            cells.append(text if text else None)
        grid.append(cells)
    return grid


def _parse_number(text: str, sheet_id: str, criteria: str, country: str) -> float:
    if "," in text:
        raise IngestError(
            f"sheet '{sheet_id}': value {text!r} for ({criteria!r}, {country}) "
            "contains a comma; use plain dot-decimal numbers"
        )
    try:
        value = float(text)
    except ValueError:
        raise IngestError(
            f"sheet '{sheet_id}': non-numeric value {text!r} for "
            f"({criteria!r}, {country})"
        ) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise IngestError(
            f"sheet '{sheet_id}': non-finite value for ({criteria!r}, {country})"
        )
    if value < 0:
        raise IngestError(
            f"sheet '{sheet_id}': negative value {value!r} for "
            f"({criteria!r}, {country})"
        )
    return value


def clean_sheet(raw: RawSheet) -> CleanTable:
    """Apply the cleaning rules to one raw sheet.

    Cleaning is idempotent: wrapping a clean table back into a raw sheet
    (with any ten preamble rows) and cleaning again reproduces it.
    """
    sheet_id = raw.sheet_id
    if len(raw.rows) <= PREAMBLE_ROWS:
        raise IngestError(
            f"sheet '{sheet_id}': only {len(raw.rows)} rows; nothing left "
            f"after skipping the {PREAMBLE_ROWS}-row preamble"
        )
    grid = _normalize(raw.rows[PREAMBLE_ROWS:])

    grid = [row for row in grid if any(cell is not None for cell in row)]
    if not grid:
        raise IngestError(f"sheet '{sheet_id}': empty after cleaning")

    width = len(grid[0])
    keep: list[int] = []
    for col in range(width):
        if any(row[col] is not None for row in grid):
            keep.append(col)
    if 0 not in keep:
        raise DataError(
            f"sheet '{sheet_id}': unanchored criteria column: the criteria "
            "column is entirely absent"
        )
    grid = [[row[col] for col in keep] for row in grid]

    grid = [
        row
        for row in grid
        if not (row[0] is not None and _PARENTHESIZED.match(row[0]))
    ]
    if not grid:
        raise IngestError(f"sheet '{sheet_id}': empty after cleaning")

    header, *data = grid
    codes: list[str] = []
    for pos, cell in enumerate(header[1:], start=1):
        if cell is None:
            raise IngestError(
                f"sheet '{sheet_id}': header column {pos} has no country code"
            )
        code = cell.upper()
        if code in codes:
            raise IngestError(f"sheet '{sheet_id}': duplicate country code '{code}'")
        codes.append(code)
    if not codes:
        raise IngestError(f"sheet '{sheet_id}': header row has no country columns")
    if not data:
        raise IngestError(f"sheet '{sheet_id}': no data rows after cleaning")

    try:
        criteria = forward_fill_criteria([row[0] for row in data])
    except DataError as exc:
        raise DataError(f"sheet '{sheet_id}': {exc}") from None

    values: list[tuple[float, ...]] = []
    for label, row in zip(criteria, data):
        parsed: list[float] = []
        for code, cell in zip(codes, row[1:]):
            if cell is None:
                raise IngestError(
                    f"sheet '{sheet_id}': missing value for "
                    f"({label!r}, {code})"
                )
            parsed.append(_parse_number(cell, sheet_id, label, code))
        values.append(tuple(parsed))

    return CleanTable(
        sheet_id=sheet_id,
        criteria=tuple(criteria),
        countries=tuple(codes),
        values=tuple(values),
    )
