"""Matrix, mask and result CSV reading/writing.

Matrix CSV: one line per row, comma separated, a missing entry is an empty
field or ``NaN``. Mask CSV: same layout with 0/1 entries.
"""

from __future__ import annotations

import csv
import io
import os
from collections.abc import Iterable

import numpy as np

from .core import RECORD_FIELDS, ExperimentRecord, InvalidInputError, MaskedMatrix

_MISSING = {"", "nan", "NaN", "NAN"}


def parse_matrix_csv(text: str, header: bool = False) -> MaskedMatrix:
    rows = list(csv.reader(io.StringIO(text)))
    if header and rows:
        rows = rows[1:]
    rows = [r for r in rows if r]
    if not rows:
        raise InvalidInputError("matrix CSV has no data rows")
    width = len(rows[0])
    values = np.zeros((len(rows), width))
    mask = np.zeros((len(rows), width), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInputError(f"row {i} has {len(row)} fields, expected {width}")
        for j, field in enumerate(row):
            field = field.strip()
            if field in _MISSING:
                continue
            try:
                values[i, j] = float(field)
            except ValueError:
                raise InvalidInputError(f"cannot parse entry ({i}, {j}): {field!r}") from None
            mask[i, j] = True
    return MaskedMatrix(values, mask)


def read_matrix_csv(path: str | os.PathLike, header: bool = False) -> MaskedMatrix:
    with open(path, newline="") as fh:
        return parse_matrix_csv(fh.read(), header=header)


def format_matrix_csv(matrix) -> str:
    if isinstance(matrix, MaskedMatrix):
        values, mask = matrix.values, matrix.mask
    else:
        values = np.asarray(matrix, dtype=np.float64)
        mask = ~np.isnan(values)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for vrow, mrow in zip(values, mask):
        writer.writerow([repr(float(v)) if m else "" for v, m in zip(vrow, mrow)])
    return out.getvalue()


def write_matrix_csv(path: str | os.PathLike, matrix) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_matrix_csv(matrix))


def write_mask_csv(path: str | os.PathLike, mask) -> None:
    mask = np.asarray(mask, dtype=bool)
    with open(path, "w", newline="") as fh:
        for row in mask:
            fh.write(",".join("1" if m else "0" for m in row) + "\n")


def read_mask_csv(path: str | os.PathLike) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    return np.array([[f.strip() == "1" for f in r] for r in rows], dtype=bool)


def format_records(records: Iterable[ExperimentRecord]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.to_row())
    return out.getvalue()


def parse_records(text: str) -> list[ExperimentRecord]:
    return [ExperimentRecord.from_row(row) for row in csv.DictReader(io.StringIO(text))]
