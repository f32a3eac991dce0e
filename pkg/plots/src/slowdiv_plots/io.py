"""CSV loading with column-aware error messages.

The readers are deliberately strict: a missing column or a value that does
not parse raises PlotDataError naming the file, the column and the row, so
a bad artifact fails loudly instead of producing an empty figure.
"""

import csv
import os

import numpy as np

from .errors import PlotDataError


def read_table(path, numeric, text=(), blank_ok=()):
    """Read CSV columns by name.

    numeric columns come back as float lists (None where a blank_ok cell is
    empty), text columns as string lists.  Returns a dict keyed by column.
    """
    if not os.path.exists(path):
        raise PlotDataError(f"file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (*numeric, *text):
            if col not in header:
                raise PlotDataError(f"{path}: missing required column '{col}'")
        rows = [r for r in reader if any((v or "").strip() for v in r.values())]
    if not rows:
        raise PlotDataError(f"{path}: no data rows")

    out = {col: [] for col in (*numeric, *text)}
    for i, row in enumerate(rows, start=1):
        for col in numeric:
            raw = (row[col] or "").strip()
            if not raw:
                if col in blank_ok:
                    out[col].append(None)
                    continue
                raise PlotDataError(
                    f"{path}: empty value in column '{col}' (row {i})"
                )
            try:
                out[col].append(float(raw))
            except ValueError:
                raise PlotDataError(
                    f"{path}: bad numeric value '{raw}' in column '{col}' (row {i})"
                ) from None
        for col in text:
            out[col].append((row[col] or "").strip())
    return out


def column(table, name):
    """Dense float array for a column read without blanks."""
    return np.asarray(table[name], dtype=float)
