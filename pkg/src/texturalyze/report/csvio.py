"""Deterministic CSV emission (shortest round-trip float formatting)."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from ..errors import InputError, MissingColumn, NonNumericCell
from ..tpa import PARAMETERS


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8", newline="")
    return path


def read_tpa_table(path) -> dict[str, dict[str, float]]:
    """Read ``tpa_parameters.csv`` into ``{burger_id: {parameter: value}}``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read TPA table: {exc}", source=str(path)) from None
    reader = csv.DictReader(io.StringIO(text))
    fields = reader.fieldnames or []
    for col in ("burger_id",) + PARAMETERS:
        if col not in fields:
            raise MissingColumn("required column missing", source=str(path), column=col)
    table = {}
    for row_no, row in enumerate(reader, start=1):
        values = {}
        for name in PARAMETERS:
            try:
                values[name] = float(row[name])
            except (TypeError, ValueError):
                raise NonNumericCell(f"cannot parse {row[name]!r}", source=str(path), row=row_no, column=name) from None
        table[row["burger_id"]] = values
    return table
