"""Ingestion of delimiter-separated numeric tables (vectors or distance matrices)."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError
from .model import DataSet

FORMATS = ("vectors", "distance_matrix")


def _split_row(line: str, use_comma: bool) -> list[str]:
    if use_comma:
        return [cell.strip() for cell in line.split(",")]
    return line.split()


def read_table(path) -> list[list[str]]:
    """Rows of string cells; delimiter (comma vs whitespace) is auto-detected.

    Blank lines and '#' comment lines are skipped. Row/column coordinates in
    errors are 1-based over the kept rows.
    """
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError(f"{path}: no data rows")
    use_comma = "," in lines[0]
    rows = [_split_row(ln, use_comma) for ln in lines]
    width = len(rows[0])
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(
                f"{path}: row {r} has {len(row)} cells, expected {width} (ragged table)"
            )
    return rows


def _to_float(cell: str, path, r: int, c: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{path}: row {r}, column {c}: not numeric: {cell!r}") from None


def load_labels(path) -> list[str]:
    """One label per line; blank lines and '#' comments are skipped."""
    labels = [
        ln.strip()
        for ln in Path(path).read_text().splitlines()
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not labels:
        raise ParseError(f"{path}: no labels")
    return labels


def load_dataset(path, format: str = "vectors", label_column: Optional[int] = None) -> DataSet:
    """Parse a numeric table into a DataSet.

    format "vectors" reads n rows of m coordinates; "distance_matrix" reads
    an n x n matrix validated for squareness, zero diagonal and non-negative
    entries. label_column (negative allowed) names a non-numeric column
    removed before the numeric parse.
    """
    if format not in FORMATS:
        raise ParseError(f"unknown format {format!r}; expected one of {FORMATS}")
    rows = read_table(path)
    width = len(rows[0])
    labels = None
    if label_column is not None:
        col = label_column if label_column >= 0 else width + label_column
        if not 0 <= col < width:
            raise ParseError(f"{path}: label column {label_column} out of range for width {width}")
        labels = [row[col] for row in rows]
        rows = [row[:col] + row[col + 1 :] for row in rows]
        width -= 1
    if width == 0:
        raise ParseError(f"{path}: no numeric columns left")

    values = np.empty((len(rows), width), dtype=np.float64)
    for r, row in enumerate(rows):
        for c, cell in enumerate(row):
            values[r, c] = _to_float(cell, path, r + 1, c + 1)

    if format == "vectors":
        return DataSet.from_vectors(values, labels=labels)

    n = values.shape[0]
    if values.shape[1] != n:
        raise ParseError(
            f"{path}: distance matrix must be square, got {n} rows x {values.shape[1]} columns"
        )
    for i in range(n):
        if values[i, i] != 0.0:
            raise ParseError(f"{path}: row {i + 1}, column {i + 1}: diagonal entry must be 0")
    bad = np.argwhere(values < 0.0)
    if bad.size:
        r, c = bad[0]
        raise ParseError(f"{path}: row {r + 1}, column {c + 1}: negative distance")
    return DataSet.from_distance_matrix(values, labels=labels)


def file_checksum(path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return f"sha256:{digest}"
