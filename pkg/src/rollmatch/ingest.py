"""CSV ingestion: missing-cell classification, locale-variant numeric and date
parsing, and per-column profiling.

Tenancy schedules from different firms format the same information
differently ("€ 1,177,924" vs "156178,19" vs "1.409"; "6-3-2013" vs
"1-jan-2016").  The parsers here resolve those variants deterministically so
the instance-based metrics can compare cell values against the template's
statistical profiles.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from datetime import date
from functools import lru_cache


class IngestError(ValueError):
    """Raised for structurally malformed input tables."""


# ---------------------------------------------------------------------------
# Missing values
# ---------------------------------------------------------------------------

_MISSING_MARKERS = {"", "-", "–", "n.a.", "na", "n/a", "null"}


def is_missing(cell: str) -> bool:
    """True for the corpus' absent-value markers ("", "-", "n.a.", ...).

    Pure function of the trimmed, case-folded cell; "0" is a value.
    """
    return cell.strip().lower() in _MISSING_MARKERS


# ---------------------------------------------------------------------------
# Numeric parsing
# ---------------------------------------------------------------------------

_CURRENCY = re.compile(r"[€$]")
_UNIT_VALUE_TOKENS = re.compile(r"(?i)(?<![0-9a-z])(sq\s*m|sqm|m²|m2|pp)(?![0-9a-z])")
_NUMBER_SHAPE = re.compile(r"^[+-]?[0-9.,]+$")


def parse_numeric(cell: str) -> float | None:
    """Parse a locale-variant numeric string, or None when it is not a number.

    Strips currency symbols, unit tokens and whitespace, then resolves
    separators: with both "." and "," present the rightmost one is the
    decimal separator; a single separator kind is decimal when followed by
    exactly 1-2 digits and grouping when followed by exactly 3 (repeated
    separators are always grouping).
    """
    s = _CURRENCY.sub(" ", cell)
    s = _UNIT_VALUE_TOKENS.sub(" ", s)
    s = re.sub(r"\s+", "", s)
    if not s or not _NUMBER_SHAPE.match(s):
        return None
    sign = ""
    if s[0] in "+-":
        sign, s = s[0], s[1:]
    if not any(ch.isdigit() for ch in s):
        return None

    has_dot, has_comma = "." in s, "," in s
    if has_dot and has_comma:
        decimal_sep = "." if s.rfind(".") > s.rfind(",") else ","
        group_sep = "," if decimal_sep == "." else "."
        s = s.replace(group_sep, "")
        s = s.replace(decimal_sep, ".")
    elif has_dot or has_comma:
        sep = "." if has_dot else ","
        head, _, tail = s.rpartition(sep)
        if s.count(sep) > 1:
            s = s.replace(sep, "")
        elif len(tail) in (1, 2):
            s = head.replace(sep, "") + "." + tail
        elif len(tail) == 3:
            s = s.replace(sep, "")
        else:
            s = head + "." + tail
    try:
        return float(sign + s)
    except ValueError:  # e.g. bare separators like "." after stripping
        return None


# ---------------------------------------------------------------------------
# Date parsing
# ---------------------------------------------------------------------------

# English and Dutch three-letter month abbreviations (mrt/mei/okt differ).
_MONTHS = {
    "jan": 1, "feb": 2, "mar": 3, "mrt": 3, "apr": 4, "may": 5, "mei": 5,
    "jun": 6, "jul": 7, "aug": 8, "sep": 9, "oct": 10, "okt": 10,
    "nov": 11, "dec": 12,
}

_ISO_RE = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")
_DMY_RE = re.compile(r"^(\d{1,2})[-/ ](\d{1,2})[-/ ](\d{2}|\d{4})$")
_DMONY_RE = re.compile(r"^(\d{1,2})[-/ ]([a-z]{3,})[-/ ](\d{2}|\d{4})$")

_YEAR_PIVOT = 50  # two-digit years below 50 are 20xx, otherwise 19xx


def _expand_year(token: str) -> int:
    year = int(token)
    if len(token) == 4:
        return year
    return 2000 + year if year < _YEAR_PIVOT else 1900 + year


def _safe_date(year: int, month: int, day: int) -> date | None:
    try:
        return date(year, month, day)
    except ValueError:
        return None


def parse_date(cell: str) -> date | None:
    """Parse ISO, day-first numeric, or day-monthname date strings.

    Tried in order: yyyy-mm-dd; d-m-y / d-m-yy (day first, two-digit years
    pivot at 50); d-monthname-y with English/Dutch abbreviations.  Separators
    are "-", "/" or space.  Returns None when nothing matches.
    """
    s = re.sub(r"\s+", " ", cell.strip().lower())
    m = _ISO_RE.match(s)
    if m:
        return _safe_date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    m = _DMY_RE.match(s)
    if m:
        return _safe_date(_expand_year(m.group(3)), int(m.group(2)), int(m.group(1)))
    m = _DMONY_RE.match(s)
    if m:
        month = _MONTHS.get(m.group(2)[:3])
        if month is not None:
            return _safe_date(_expand_year(m.group(3)), month, int(m.group(1)))
    return None


# ---------------------------------------------------------------------------
# Header cleaning
# ---------------------------------------------------------------------------

_BRACKETED = re.compile(r"\([^)]*\)|\[[^\]]*\]")
_POSITIONAL_SUFFIX = re.compile(r"\.\d+$")
_NON_TOKEN = re.compile(r"[^0-9a-z²]+")

# Measurement-unit noise dropped from header token sets ("Office space sq m"
# carries the same name signal as "Office space").
_UNIT_HEADER_TOKENS = {"sq", "sqm", "m", "m2", "m²"}


@lru_cache(maxsize=16384)
def clean_text(text: str) -> str:
    """Normalize a header or candidate name for the name-based metrics.

    Lowercases, drops bracketed unit annotations and positional dedup
    suffixes (".1"), splits on punctuation/underscore/slash/whitespace and
    removes measurement-unit tokens.
    """
    s = text.strip().lower()
    s = _BRACKETED.sub(" ", s)
    s = _POSITIONAL_SUFFIX.sub("", s.strip())
    s = _NON_TOKEN.sub(" ", s)
    tokens = [t for t in s.split() if t not in _UNIT_HEADER_TOKENS]
    return " ".join(tokens)


def clean_tokens(text: str) -> frozenset[str]:
    return frozenset(clean_text(text).split())


# ---------------------------------------------------------------------------
# Tables and profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceTable:
    """A raw ingested table: rectangular grid of strings plus headers."""

    format_id: str
    headers: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]
    name: str = ""

    @property
    def row_count(self) -> int:
        return len(self.cells)

    @property
    def col_count(self) -> int:
        return len(self.headers)

    def column(self, index: int) -> list[str]:
        return [row[index] for row in self.cells]


@dataclass(frozen=True)
class ColumnProfile:
    """Per-column parse statistics feeding the instance-based metrics."""

    header_raw: str
    header_clean: str
    values_raw: tuple[str, ...]
    values_nonmissing: tuple[str, ...]
    numeric_values: tuple[float, ...]
    date_values: tuple[date, ...]

    @property
    def tokens(self) -> frozenset[str]:
        return frozenset(self.header_clean.split())

    @property
    def mean(self) -> float | None:
        """Mean of the numeric parses; None when nothing parsed."""
        if not self.numeric_values:
            return None
        return sum(self.numeric_values) / len(self.numeric_values)


def _dedupe_headers(headers: list[str]) -> tuple[str, ...]:
    seen: dict[str, int] = {}
    out: list[str] = []
    for h in headers:
        if h in seen:
            seen[h] += 1
            out.append(f"{h}.{seen[h]}")
        else:
            seen[h] = 0
            out.append(h)
    return tuple(out)


def load_table(csv_text: str, format_id: str, name: str = "") -> SourceTable:
    """Read an RFC-4180-style CSV into a rectangular SourceTable.

    Short rows are padded with empty cells; a row longer than the header row
    is an error naming the row index.  Duplicate headers are disambiguated
    with positional suffixes (".1", ".2"), mirroring the corpus convention.
    """
    reader = csv.reader(io.StringIO(csv_text))
    rows = [row for row in reader]
    if not rows:
        raise IngestError("empty input: no header row")
    headers = _dedupe_headers([h.strip() for h in rows[0]])
    width = len(headers)
    cells: list[tuple[str, ...]] = []
    for i, row in enumerate(rows[1:], start=1):
        if len(row) > width:
            raise IngestError(f"row {i} has {len(row)} cells, more than the {width} headers")
        padded = tuple(row) + ("",) * (width - len(row))
        cells.append(padded)
    return SourceTable(format_id=format_id, headers=headers, cells=tuple(cells), name=name)


def profile_column(table: SourceTable, index: int) -> ColumnProfile:
    """Build the parse profile of one column."""
    if not 0 <= index < table.col_count:
        raise IndexError(f"column index {index} out of range 0..{table.col_count - 1}")
    raw = tuple(table.column(index))
    nonmissing = tuple(v for v in raw if not is_missing(v))
    numeric = tuple(v for v in (parse_numeric(c) for c in nonmissing) if v is not None)
    dates = tuple(v for v in (parse_date(c) for c in nonmissing) if v is not None)
    return ColumnProfile(
        header_raw=table.headers[index],
        header_clean=clean_text(table.headers[index]),
        values_raw=raw,
        values_nonmissing=nonmissing,
        numeric_values=numeric,
        date_values=dates,
    )


def profile_table(table: SourceTable) -> list[ColumnProfile]:
    return [profile_column(table, i) for i in range(table.col_count)]


def load_table_file(path, format_id: str, name: str = "") -> SourceTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return load_table(fh.read(), format_id, name=name)


def load_manifest(path) -> list[SourceTable]:
    """Load every document listed in a dataset manifest (YAML).

    The manifest has a top-level ``documents:`` list of ``{path, format_id}``
    maps; paths are resolved relative to the manifest file.
    """
    import os

    import yaml

    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh.read())
    if not isinstance(doc, dict) or not isinstance(doc.get("documents"), list):
        raise IngestError("manifest must have a top-level 'documents' list")
    base = os.path.dirname(os.path.abspath(path))
    tables: list[SourceTable] = []
    for entry in doc["documents"]:
        csv_path = entry["path"]
        if not os.path.isabs(csv_path):
            csv_path = os.path.join(base, csv_path)
        name = os.path.splitext(os.path.basename(csv_path))[0]
        tables.append(load_table_file(csv_path, str(entry["format_id"]), name=name))
    return tables
