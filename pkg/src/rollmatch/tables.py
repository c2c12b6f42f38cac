"""Shared materialized-table representation for standardized and integrated outputs.

Cells are either a string value or None; None is serialized as the empty
string, which is the canonical null in every CSV this package emits.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field


@dataclass
class MaterializedTable:
    name: str
    columns: list[str]
    rows: list[list[str | None]]

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def column_count(self) -> int:
        return len(self.columns)

    def null_count(self) -> int:
        return sum(1 for row in self.rows for cell in row if cell is None)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if cell is None else cell for cell in row])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text())


def concat_tables(name: str, tables: list[MaterializedTable]) -> MaterializedTable:
    """Stack row-wise; all inputs must share the same column list."""
    if not tables:
        return MaterializedTable(name=name, columns=[], rows=[])
    columns = tables[0].columns
    for t in tables[1:]:
        if t.columns != columns:
            raise ValueError(f"column mismatch between '{tables[0].name}' and '{t.name}'")
    rows = [row for t in tables for row in t.rows]
    return MaterializedTable(name=name, columns=list(columns), rows=rows)
