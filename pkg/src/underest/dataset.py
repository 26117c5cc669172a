"""Tabular binary-classification datasets.

Loading, synthetic generation, sensitive-feature injection, splitting and
encoding into a numeric design matrix. Datasets are columnar and immutable:
every operation returns a new :class:`Dataset`.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)


class DatasetError(ValueError):
    """Raised for malformed data, schemas or dataset operations."""


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Schema:
    """Column layout plus the label and sensitive-group designations.

    ``columns`` is an ordered tuple of ``(name, kind)`` pairs. The label column
    and, when set, the sensitive column must be categorical.
    """

    columns: tuple[tuple[str, ColumnKind], ...]
    label_column: str
    positive_label: str
    sensitive_column: str | None = None
    sensitive_minority_value: str | None = None

    def __post_init__(self):
        cols = tuple((str(n), ColumnKind(k)) for n, k in self.columns)
        object.__setattr__(self, "columns", cols)
        names = [n for n, _ in cols]
        if len(set(names)) != len(names):
            raise DatasetError("schema has duplicate column names")
        kinds = dict(cols)
        if self.label_column not in kinds:
            raise DatasetError(f"label_column {self.label_column!r} is not a schema column")
        if kinds[self.label_column] is not ColumnKind.CATEGORICAL:
            raise DatasetError(f"label_column {self.label_column!r} must be categorical")
        if self.sensitive_column is not None:
            if self.sensitive_column not in kinds:
                raise DatasetError(
                    f"sensitive_column {self.sensitive_column!r} is not a schema column")
            if kinds[self.sensitive_column] is not ColumnKind.CATEGORICAL:
                raise DatasetError(
                    f"sensitive_column {self.sensitive_column!r} must be categorical")
            if self.sensitive_minority_value is None:
                raise DatasetError("sensitive_minority_value is required with sensitive_column")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.columns]

    def kind(self, name: str) -> ColumnKind:
        return dict(self.columns)[name]

    def replace(self, **changes) -> "Schema":
        fields_ = dict(
            columns=self.columns,
            label_column=self.label_column,
            positive_label=self.positive_label,
            sensitive_column=self.sensitive_column,
            sensitive_minority_value=self.sensitive_minority_value,
        )
        fields_.update(changes)
        return Schema(**fields_)

    def to_dict(self) -> dict:
        return {
            "columns": {n: k.value for n, k in self.columns},
            "label_column": self.label_column,
            "positive_label": self.positive_label,
            "sensitive_column": self.sensitive_column,
            "sensitive_minority_value": self.sensitive_minority_value,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Schema":
        try:
            cols = d["columns"]
            label = d["label_column"]
            positive = d["positive_label"]
        except KeyError as exc:
            raise DatasetError(f"schema is missing field {exc.args[0]!r}") from None
        if isinstance(cols, Mapping):
            pairs = list(cols.items())
        else:
            pairs = [(c["name"], c["kind"]) for c in cols]
        try:
            pairs = [(n, ColumnKind(k)) for n, k in pairs]
        except ValueError as exc:
            raise DatasetError(f"schema: {exc}") from None
        minority = d.get("sensitive_minority_value")
        return cls(
            columns=tuple(pairs),
            label_column=label,
            positive_label=str(positive),
            sensitive_column=d.get("sensitive_column"),
            sensitive_minority_value=None if minority is None else str(minority),
        )

    @classmethod
    def load(cls, path) -> "Schema":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except FileNotFoundError:
            raise DatasetError(f"schema file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise DatasetError(f"schema file {path} is not valid JSON: {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class Dataset:
    """Columnar dataset: ``data`` maps column name to a read-only array.

    Numeric columns are ``float64``; categorical columns are object arrays of
    ``str``.
    """

    schema: Schema
    data: Mapping[str, np.ndarray]

    def __post_init__(self):
        names = self.schema.names
        if set(self.data) != set(names):
            raise DatasetError("dataset columns do not match schema")
        cols = {}
        n = None
        for name, kind in self.schema.columns:
            arr = self.data[name]
            if kind is ColumnKind.NUMERIC:
                arr = np.array(arr, dtype=np.float64)
                if not np.all(np.isfinite(arr)):
                    raise DatasetError(f"numeric column {name!r} has non-finite values")
            else:
                arr = np.array([str(v) for v in arr], dtype=object)
                if any(v == "" for v in arr):
                    raise DatasetError(f"categorical column {name!r} has empty cells")
            arr.flags.writeable = False
            if n is None:
                n = len(arr)
            elif len(arr) != n:
                raise DatasetError("columns have unequal lengths")
            cols[name] = arr
        if not n:
            raise DatasetError("dataset must have at least one row")
        object.__setattr__(self, "data", MappingProxyType(cols))

    @property
    def n(self) -> int:
        return len(self.data[self.schema.label_column])

    def __len__(self) -> int:
        return self.n

    def column(self, name: str) -> np.ndarray:
        return self.data[name]

    def rows(self) -> Iterator[dict]:
        names = self.schema.names
        for i in range(self.n):
            yield {c: self.data[c][i] for c in names}

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.schema, {k: v[idx] for k, v in self.data.items()})

    def labels(self) -> np.ndarray:
        """1 where the row carries the positive label, else 0."""
        return (self.data[self.schema.label_column] == self.schema.positive_label).astype(np.int8)

    def minority(self) -> np.ndarray | None:
        """1 where the sensitive column holds the minority value; None if undesignated."""
        s = self.schema
        if s.sensitive_column is None:
            return None
        return (self.data[s.sensitive_column] == s.sensitive_minority_value).astype(np.int8)

    def with_column(self, name: str, kind: ColumnKind, values, **schema_changes) -> "Dataset":
        if name in self.data:
            raise DatasetError(f"column {name!r} already exists")
        schema = self.schema.replace(columns=self.schema.columns + ((name, kind),), **schema_changes)
        data = dict(self.data)
        data[name] = values
        return Dataset(schema, data)

    def to_csv(self, path) -> None:
        write_csv(self, path)


def _check_label_values(ds: Dataset) -> None:
    s = ds.schema
    values = sorted(set(ds.data[s.label_column]))
    if len(values) != 2:
        raise DatasetError(
            f"label column {s.label_column!r} must have exactly 2 distinct values, found {len(values)}")
    if s.positive_label not in values:
        raise DatasetError(f"positive_label {s.positive_label!r} not among label values {values}")
    if s.sensitive_column is not None:
        svals = set(ds.data[s.sensitive_column])
        if len(svals) > 2:
            raise DatasetError(
                f"sensitive column {s.sensitive_column!r} must be binary, found {len(svals)} values")


def load_csv(path, schema: Schema) -> Dataset:
    """Read a headered, comma-delimited UTF-8 file conforming to ``schema``.

    Cells are stripped of surrounding whitespace. The header must contain
    exactly the schema's column names, in any order.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path} is empty") from None
        if sorted(header) != sorted(schema.names):
            missing = sorted(set(schema.names) - set(header))
            extra = sorted(set(header) - set(schema.names))
            raise DatasetError(f"header mismatch in {path}: missing {missing}, unexpected {extra}")
        pos = {h: i for i, h in enumerate(header)}
        raw: dict[str, list] = {n: [] for n in schema.names}
        for rowno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetError(f"row {rowno} has {len(row)} cells, expected {len(header)}")
            for name, kind in schema.columns:
                cell = row[pos[name]].strip()
                if kind is ColumnKind.NUMERIC:
                    try:
                        val = float(cell)
                    except ValueError:
                        val = math.nan
                    if not math.isfinite(val):
                        raise DatasetError(
                            f"row {rowno}, column {name!r}: cannot parse {cell!r} as a finite number")
                    raw[name].append(val)
                else:
                    if not cell:
                        raise DatasetError(f"row {rowno}, column {name!r}: empty categorical cell")
                    raw[name].append(cell)
    if not raw[schema.label_column]:
        raise DatasetError(f"{path} has no data rows")
    ds = Dataset(schema, raw)
    _check_label_values(ds)
    return ds


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(ds: Dataset, path) -> None:
    names = ds.schema.names
    cols = [ds.data[n] for n in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(ds.n):
            w.writerow([_fmt(c[i]) for c in cols])


@dataclass(frozen=True)
class InjectionSpec:
    p_minority_given_pos: float
    p_minority_given_neg: float
    seed: int = 0

    def __post_init__(self):
        for name in ("p_minority_given_pos", "p_minority_given_neg"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DatasetError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 2 / 3
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DatasetError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


MINORITY = "0"
MAJORITY = "1"


def inject_sensitive(ds: Dataset, spec: InjectionSpec, column_name: str = "S") -> Dataset:
    """Add a synthetic binary sensitive column ``column_name``.

    Each row is independently marked minority (``"0"``) with probability
    ``spec.p_minority_given_pos`` if its label is positive and
    ``spec.p_minority_given_neg`` otherwise; other rows get ``"1"``. The new
    column becomes the schema's sensitive column.
    """
    if column_name in ds.data:
        raise DatasetError(f"column {column_name!r} already exists")
    rng = np.random.default_rng(spec.seed)
    y = ds.labels()
    p = np.where(y == 1, spec.p_minority_given_pos, spec.p_minority_given_neg)
    minority = rng.random(ds.n) < p
    values = np.where(minority, MINORITY, MAJORITY).astype(object)
    return ds.with_column(
        column_name, ColumnKind.CATEGORICAL, values,
        sensitive_column=column_name, sensitive_minority_value=MINORITY)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Partition rows into train and test, preserving file order on each side."""
    n = ds.n
    if n < 2:
        raise DatasetError("need at least 2 rows to split")
    n_train = _round_half_up(spec.train_fraction * n)
    if n_train < 1 or n_train > n - 1:
        raise DatasetError(
            f"train_fraction {spec.train_fraction} leaves an empty side for n={n}")
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        y = ds.labels()
        pos = np.flatnonzero(y == 1)
        neg = np.flatnonzero(y == 0)
        k = _round_half_up(spec.train_fraction * len(pos))
        k = min(max(k, n_train - len(neg)), len(pos), n_train)
        train_idx = np.concatenate([
            rng.permutation(pos)[:k],
            rng.permutation(neg)[:n_train - k],
        ])
    else:
        train_idx = rng.permutation(n)[:n_train]
    mask = np.zeros(n, dtype=bool)
    mask[train_idx] = True
    return ds.take(np.flatnonzero(mask)), ds.take(np.flatnonzero(~mask))


def generate_synthetic(n: int, n_features: int, class_positive_rate: float,
                       class_separation: float, seed: int = 0) -> Dataset:
    """Two spherical unit-variance Gaussian clusters, one per class.

    Cluster means lie ``class_separation`` apart along the all-ones
    direction. Columns are ``x0..x{d-1}`` plus a label ``y`` in {"1", "0"}
    with "1" positive.
    """
    if n < 2:
        raise DatasetError(f"n must be at least 2, got {n}")
    if n_features < 1:
        raise DatasetError(f"n_features must be at least 1, got {n_features}")
    if not 0.0 <= class_positive_rate <= 1.0:
        raise DatasetError(f"class_positive_rate must be in [0, 1], got {class_positive_rate}")
    if class_separation < 0:
        raise DatasetError(f"class_separation must be >= 0, got {class_separation}")
    rng = np.random.default_rng(seed)
    y = rng.random(n) < class_positive_rate
    X = rng.standard_normal((n, n_features))
    X += np.outer(y, np.full(n_features, class_separation / math.sqrt(n_features)))
    names = [f"x{j}" for j in range(n_features)]
    schema = Schema(
        columns=tuple((c, ColumnKind.NUMERIC) for c in names) + (("y", ColumnKind.CATEGORICAL),),
        label_column="y",
        positive_label="1",
    )
    data = {c: X[:, j] for j, c in enumerate(names)}
    data["y"] = np.where(y, "1", "0").astype(object)
    return Dataset(schema, data)


@dataclass(frozen=True)
class Encoding:
    """Training-set statistics used to encode any split the same way."""

    numeric: Mapping[str, tuple[float, float]]
    categories: Mapping[str, tuple[str, ...]]
    feature_columns: tuple[str, ...]

    @property
    def feature_names(self) -> list[str]:
        out = []
        for c in self.feature_columns:
            if c in self.numeric:
                out.append(c)
            else:
                out.extend(f"{c}={v}" for v in self.categories[c])
        return out

    @property
    def groups(self) -> list[list[int]]:
        """Column-index blocks of the one-hot encoded categorical features."""
        out, j = [], 0
        for c in self.feature_columns:
            if c in self.numeric:
                j += 1
            else:
                k = len(self.categories[c])
                out.append(list(range(j, j + k)))
                j += k
        return out


def fit_encoding(ds: Dataset) -> Encoding:
    """Collect per-column statistics from (training) dataset ``ds``.

    Numeric columns use the population standard deviation; a constant column
    gets scale 1 so it encodes to zeros. Categories are sorted.
    """
    numeric, cats, feats = {}, {}, []
    for name, kind in ds.schema.columns:
        if name == ds.schema.label_column:
            continue
        feats.append(name)
        col = ds.data[name]
        if kind is ColumnKind.NUMERIC:
            mu = float(col.mean())
            sd = float(col.std())
            numeric[name] = (mu, sd if sd > 0 else 1.0)
        else:
            cats[name] = tuple(sorted(set(col)))
    return Encoding(MappingProxyType(numeric), MappingProxyType(cats), tuple(feats))


@dataclass(frozen=True)
class EncodedData:
    X: np.ndarray
    y: np.ndarray
    minority: np.ndarray | None
    feature_names: list[str]
    groups: list[list[int]]
    unseen: Mapping[str, int] = field(default_factory=dict)


def encode(ds: Dataset, encoding: Encoding | None = None) -> EncodedData:
    """Build the numeric design matrix, label vector and minority indicator.

    Categorical columns, the sensitive column included, become one indicator
    column per category in ``encoding``; values not seen when the encoding was
    fitted map to all-zero indicators and are counted in ``unseen``.
    """
    if encoding is None:
        encoding = fit_encoding(ds)
    blocks, unseen = [], {}
    for name in encoding.feature_columns:
        col = ds.data[name]
        if name in encoding.numeric:
            mu, sd = encoding.numeric[name]
            blocks.append(((col - mu) / sd)[:, None])
        else:
            cats = encoding.categories[name]
            lookup = {v: j for j, v in enumerate(cats)}
            block = np.zeros((ds.n, len(cats)))
            idx = np.array([lookup.get(v, -1) for v in col], dtype=np.intp)
            hit = idx >= 0
            block[np.flatnonzero(hit), idx[hit]] = 1.0
            missing = int((~hit).sum())
            if missing:
                unseen[name] = missing
                log.warning("column %r: %d rows with unseen categories encoded as zeros",
                            name, missing)
            blocks.append(block)
    X = np.hstack(blocks) if blocks else np.zeros((ds.n, 0))
    return EncodedData(
        X=np.ascontiguousarray(X, dtype=np.float64),
        y=ds.labels(),
        minority=ds.minority(),
        feature_names=encoding.feature_names,
        groups=encoding.groups,
        unseen=unseen,
    )


def rates_by_label(ds: Dataset) -> tuple[float, float]:
    """Empirical (P[minority | positive], P[minority | negative])."""
    y = ds.labels()
    s = ds.minority()
    if s is None:
        raise DatasetError("dataset has no sensitive column")
    pos, neg = y == 1, y == 0
    p = float(s[pos].mean()) if pos.any() else math.nan
    q = float(s[neg].mean()) if neg.any() else math.nan
    return p, q


def from_columns(columns: Mapping[str, Sequence], schema: Schema) -> Dataset:
    ds = Dataset(schema, dict(columns))
    _check_label_values(ds)
    return ds
