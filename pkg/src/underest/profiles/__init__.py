"""Schemas and tolerant loaders for the Adult and Recidivism file layouts.

The loaders accept the files as commonly distributed and normalize them to
the bundled schemas:

* Adult: the UCI ``adult.data`` / ``adult.test`` files (headerless, the test
  file with a leading comment line and labels ending in ``.``) or a headered
  CSV with the same 15 columns. Several files are concatenated in order.
* Recidivism: the two-year recidivism CSV with its many extra columns; only
  the seven feature columns, ``race`` and ``two_year_recid`` are kept.
  ``race`` is binarized around the audited group.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from underest.dataset import ColumnKind, Dataset, DatasetError, Schema, from_columns

_HERE = Path(__file__).parent


def adult_schema() -> Schema:
    return Schema.load(_HERE / "adult.json")


def recidivism_schema() -> Schema:
    return Schema.load(_HERE / "recidivism.json")


def _columns_from_rows(rows, schema: Schema, source) -> Dataset:
    cols: dict[str, list] = {n: [] for n in schema.names}
    for rowno, row in rows:
        for name, kind in schema.columns:
            cell = row[name].strip()
            if kind is ColumnKind.NUMERIC:
                try:
                    cols[name].append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"{source}: row {rowno}, column {name!r}: cannot parse {cell!r}") from None
            else:
                cols[name].append(cell)
    if not cols[schema.label_column]:
        raise DatasetError(f"{source}: no data rows")
    data = {n: np.asarray(v, dtype=np.float64) if schema.kind(n) is ColumnKind.NUMERIC
            else np.asarray(v, dtype=object) for n, v in cols.items()}
    return from_columns(data, schema)


ADULT_ORDER = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status", "occupation",
    "relationship", "race", "sex", "capital-gain", "capital-loss", "hours-per-week",
    "native-country", "income",
]


def load_adult(*paths) -> Dataset:
    """Load and concatenate Adult files; labels ``>50K.`` become ``>50K``."""
    if not paths:
        raise DatasetError("load_adult needs at least one path")
    schema = adult_schema()
    names = schema.names
    rows = []
    for path in map(Path, paths):
        if not path.is_file():
            raise DatasetError(f"data file not found: {path}")
        header = ADULT_ORDER
        with open(path, newline="", encoding="utf-8") as fh:
            for rowno, cells in enumerate(csv.reader(fh), start=1):
                cells = [c.strip() for c in cells]
                if not any(cells) or cells[0].startswith("|"):
                    continue
                if sorted(cells) == sorted(names):
                    header = cells
                    continue
                if len(cells) != len(names):
                    raise DatasetError(f"{path}: row {rowno} has {len(cells)} cells, expected {len(names)}")
                row = dict(zip(header, cells))
                row["income"] = row["income"].rstrip(".")
                rows.append((rowno, row))
    return _columns_from_rows(rows, schema, ", ".join(map(str, paths)))


NON_CAUCASIAN = "non-Caucasian"


def load_recidivism(path) -> Dataset:
    """Load the seven-feature recidivism view from a (possibly wider) CSV.

    ``race`` is collapsed to ``Caucasian`` versus ``non-Caucasian`` so the
    sensitive column is binary with Caucasian as the audited group.
    """
    schema = recidivism_schema()
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = [f.strip() for f in reader.fieldnames or []]
        missing = sorted(set(schema.names) - set(fields))
        if missing:
            raise DatasetError(f"{path}: missing columns {missing}")
        reader.fieldnames = fields
        rows = [(i, r) for i, r in enumerate(reader, start=1)]
    minority = schema.sensitive_minority_value
    for _, r in rows:
        if r["race"].strip() != minority:
            r["race"] = NON_CAUCASIAN
    return _columns_from_rows(rows, schema, path)
