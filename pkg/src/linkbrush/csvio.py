"""CSV ingestion and serialization (RFC 4180, header row required).

Type inference: a column is numeric iff every non-empty cell parses as a
finite decimal number, otherwise categorical. Empty cells are missing.
Round trip preserves values and missingness exactly; numeric cells are
written in shortest round-trip form.
"""
from __future__ import annotations

import csv
import io
import math
from typing import Optional

from .table import ReactiveTable


class CsvError(ValueError):
    pass


def _parse_number(cell: str) -> Optional[float]:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(path) -> list[tuple[str, list]]:
    """Read a CSV file into (name, values) pairs suitable for ``augment``.

    Missing numeric cells become None. Raises CsvError (with the 1-based line
    number) for ragged rows, duplicate or empty headers, or an empty file.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return loads_csv(fh.read(), source=str(path))


def loads_csv(text: str, source: str = "<string>") -> list[tuple[str, list]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvError(f"{source}: empty file") from None
    if any(not name.strip() for name in header):
        raise CsvError(f"{source}: blank column name in header")
    if len(set(header)) != len(header):
        raise CsvError(f"{source}: duplicate column names in header")
    ncol = len(header)
    cells: list[list[str]] = [[] for _ in header]
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue  # trailing blank line
        if len(row) != ncol:
            raise CsvError(
                f"{source}: line {line_no} has {len(row)} fields, expected {ncol}")
        for i, cell in enumerate(row):
            cells[i].append(cell)
    columns: list[tuple[str, list]] = []
    for name, raw in zip(header, cells):
        numeric = True
        parsed: list[Optional[float]] = []
        for cell in raw:
            if cell == "":
                parsed.append(None)
                continue
            value = _parse_number(cell)
            if value is None:
                numeric = False
                break
            parsed.append(value)
        if numeric:
            columns.append((name, parsed))
        else:
            columns.append((name, [cell if cell != "" else None for cell in raw]))
    return columns


def _format_number(value: float) -> str:
    if not math.isfinite(value):
        return repr(value)
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def save_csv(table: ReactiveTable, path, include_engine_columns: bool = False) -> None:
    """Write a table back out; '.'-prefixed columns are skipped by default."""
    names = [n for n in table.column_names()
             if include_engine_columns or not n.startswith(".")]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        cols = [table.column(n) for n in names]
        rendered = []
        for col in cols:
            if col.kind == "numeric":
                rendered.append([
                    "" if m else _format_number(v)
                    for v, m in zip(col.values.tolist(), col.missing.tolist())])
            elif col.kind == "categorical":
                rendered.append(["" if v is None else v for v in col.labels()])
            elif col.kind == "boolean":
                rendered.append(["true" if v else "false" for v in col.values.tolist()])
            else:
                from .colors import unpack_array
                rendered.append(unpack_array(col.values))
        for row in zip(*rendered):
            writer.writerow(row)
