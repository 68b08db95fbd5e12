"""Column-typed tables, CSV ingestion, transforms and train/test splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class DataError(ValueError):
    """Raised for malformed input data (bad CSV, wrong column kinds, ...)."""


@dataclass(frozen=True, eq=False)
class Column:
    """One named column.

    Numeric columns hold finite float64 values. Categorical columns hold
    integer level codes into ``levels``.
    """

    name: str
    kind: str
    values: np.ndarray
    levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind == NUMERIC:
            values = np.asarray(self.values, dtype=np.float64)
            if not np.all(np.isfinite(values)):
                raise DataError(f"column {self.name!r} has non-finite values")
            if self.levels is not None:
                raise DataError(f"numeric column {self.name!r} cannot carry levels")
        elif self.kind == CATEGORICAL:
            values = np.asarray(self.values, dtype=np.int64)
            if not self.levels:
                raise DataError(f"categorical column {self.name!r} needs at least one level")
            if values.size and (values.min() < 0 or values.max() >= len(self.levels)):
                raise DataError(f"column {self.name!r} has level codes out of range")
            object.__setattr__(self, "levels", tuple(str(lv) for lv in self.levels))
        else:
            raise DataError(f"unknown column kind {self.kind!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def is_numeric(self) -> bool:
        return self.kind == NUMERIC

    def labels(self) -> list[str]:
        """Values as strings (level labels for categoricals)."""
        if self.is_numeric:
            return ["%.17g" % v for v in self.values]
        return [self.levels[c] for c in self.values]

    def take(self, idx) -> "Column":
        return Column(self.name, self.kind, self.values[idx], self.levels)

    @classmethod
    def categorical(cls, name: str, labels: Iterable, levels: Sequence[str] | None = None):
        labels = [str(v) for v in labels]
        if levels is None:
            levels = sorted(set(labels))
        lookup = {lv: i for i, lv in enumerate(levels)}
        try:
            codes = np.array([lookup[v] for v in labels], dtype=np.int64)
        except KeyError as exc:
            raise DataError(f"column {name!r}: unknown level {exc.args[0]!r}") from None
        return cls(name, CATEGORICAL, codes, tuple(levels))


@dataclass(frozen=True)
class FeatureSchema:
    """Names, kinds and levels of the predictor columns a model was fit on."""

    names: tuple[str, ...]
    kinds: tuple[str, ...]
    levels: tuple[tuple[str, ...] | None, ...]

    @property
    def n_features(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "kinds": list(self.kinds),
            "levels": [list(lv) if lv is not None else None for lv in self.levels],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeatureSchema":
        return cls(
            tuple(d["names"]),
            tuple(d["kinds"]),
            tuple(tuple(lv) if lv is not None else None for lv in d["levels"]),
        )


@dataclass(frozen=True, eq=False)
class Table:
    """Immutable ordered collection of equal-length columns.

    ``response`` names the column models are trained to predict; it may be
    ``None`` for feature-only blocks. ``n_dropped`` records how many rows
    were discarded during ingestion because of missing cells.
    """

    columns: tuple[Column, ...]
    response: str | None = None
    n_dropped: int = 0
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate column names: {dupes}")
        if cols:
            lengths = {len(c) for c in cols}
            if len(lengths) != 1:
                raise DataError(f"columns have unequal lengths: {sorted(lengths)}")
        if self.response is not None and self.response not in names:
            raise DataError(f"response column {self.response!r} not found")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def n(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.columns if c.name != self.response]

    @property
    def task(self) -> str:
        """'regression' or 'classification', from the response column kind."""
        if self.response is None:
            raise DataError("table has no response column")
        return "regression" if self[self.response].is_numeric else "classification"

    def __getitem__(self, name: str) -> Column:
        try:
            return self.columns[self._index[name]]
        except KeyError:
            raise KeyError(f"unknown column {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self):
        return self.n

    def take(self, idx) -> "Table":
        idx = np.asarray(idx, dtype=np.int64)
        return Table(tuple(c.take(idx) for c in self.columns), self.response)

    def with_columns(self, replacements: Mapping[str, Column]) -> "Table":
        cols = tuple(replacements.get(c.name, c) for c in self.columns)
        return Table(cols, self.response, self.n_dropped)

    def with_response(self, response: str | None) -> "Table":
        return Table(self.columns, response, self.n_dropped)

    def select(self, names: Sequence[str]) -> "Table":
        resp = self.response if self.response in names else None
        return Table(tuple(self[n] for n in names), resp)

    def schema(self, names: Sequence[str] | None = None) -> FeatureSchema:
        names = self.feature_names if names is None else list(names)
        cols = [self[n] for n in names]
        return FeatureSchema(
            tuple(names), tuple(c.kind for c in cols), tuple(c.levels for c in cols)
        )

    def feature_matrix(self, names: Sequence[str] | None = None) -> np.ndarray:
        """Predictor block as float64; categorical columns carry level codes."""
        names = self.feature_names if names is None else list(names)
        if not names:
            return np.empty((self.n, 0))
        return np.column_stack([self[n].values.astype(np.float64) for n in names])

    def to_csv(self, path) -> None:
        write_csv(self, path)

    @classmethod
    def from_arrays(cls, X, y=None, feature_names=None, response="y",
                    categorical: Sequence[str] = ()) -> "Table":
        """Build a table from a 2-D array (and optional response vector)."""
        X = np.asarray(X, dtype=object if categorical else np.float64)
        if X.ndim != 2:
            raise DataError("X must be 2-D")
        if feature_names is None:
            feature_names = [f"x{j + 1}" for j in range(X.shape[1])]
        if len(feature_names) != X.shape[1]:
            raise DataError("feature_names length does not match X")
        cols = []
        for j, name in enumerate(feature_names):
            if name in categorical:
                cols.append(Column.categorical(name, X[:, j]))
            else:
                cols.append(Column(name, NUMERIC, X[:, j].astype(np.float64)))
        if y is None:
            return cls(tuple(cols))
        y = np.asarray(y)
        if y.dtype.kind in "fiu" and response not in categorical:
            cols.append(Column(response, NUMERIC, y.astype(np.float64)))
        else:
            cols.append(Column.categorical(response, y))
        return cls(tuple(cols), response)


def _parse_float(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def read_csv(path, schema: Mapping[str, str] | None = None,
             response: str | None = None) -> Table:
    """Read a comma-separated file with a mandatory header row.

    Column kinds come from ``schema`` where given, otherwise a column is
    numeric iff every non-missing cell parses as a finite float. Rows with
    any empty cell are dropped and counted in ``Table.n_dropped``.
    """
    path = Path(path)
    schema = dict(schema or {})
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot read file: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"{path}:1: duplicate header names {dupes}")
    for name, kind in schema.items():
        if name not in header:
            raise DataError(f"{path}: schema names unknown column {name!r}")
        if kind not in (NUMERIC, CATEGORICAL):
            raise DataError(f"{path}: bad kind {kind!r} for column {name!r}")

    width = len(header)
    kept = []
    dropped = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) > width:
            raise DataError(f"{path}:{lineno}: {len(row)} cells, header has {width}")
        cells = [c.strip() for c in row] + [""] * (width - len(row))
        if any(c == "" for c in cells):
            dropped += 1
            continue
        kept.append((lineno, cells))
    if not kept:
        raise DataError(f"{path}: no complete rows left after dropping {dropped}")

    columns = []
    for j, name in enumerate(header):
        cells = [r[j] for _, r in kept]
        kind = schema.get(name)
        if kind is None:
            kind = NUMERIC if all(_parse_float(c) is not None for c in cells) else CATEGORICAL
        if kind == NUMERIC:
            vals = []
            for lineno, r in kept:
                v = _parse_float(r[j])
                if v is None:
                    raise DataError(f"{path}:{lineno}: column {name!r} value {r[j]!r} is not numeric")
                vals.append(v)
            columns.append(Column(name, NUMERIC, np.array(vals, dtype=np.float64)))
        else:
            columns.append(Column.categorical(name, cells))
    return Table(tuple(columns), response, dropped)


def write_csv(table: Table, path) -> None:
    """Write ``table`` with a header row; numerics at 17 significant digits."""
    cols = [c.labels() for c in table.columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.names)
        for i in range(table.n):
            writer.writerow([col[i] for col in cols])


def log_transform(table: Table, columns: Sequence[str], offset: int = 0) -> Table:
    """Replace each value ``v`` of the named numeric columns by ``ln(v + offset)``."""
    if offset not in (0, 1):
        raise ValueError("offset must be 0 or 1")
    out = {}
    for name in columns:
        col = table[name]
        if not col.is_numeric:
            raise DataError(f"cannot log-transform categorical column {name!r}")
        shifted = col.values + offset
        if np.any(shifted <= 0):
            raise DataError(f"column {name!r} has values with v + {offset} <= 0")
        out[name] = Column(name, NUMERIC, np.log(shifted))
    return table.with_columns(out)


def split(table: Table, train_fraction: float, seed: int) -> tuple[Table, Table]:
    """Seeded shuffle split; the first ceil(fraction * n) rows train.

    The train size is clamped to [1, n - 1] so both parts are non-empty.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    if table.n < 2:
        raise DataError("need at least 2 rows to split")
    train_idx, test_idx = split_indices(table.n, train_fraction, seed)
    return table.take(train_idx), table.take(test_idx)


def split_indices(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Row indices of the partition produced by :func:`split`."""
    # exact rational arithmetic, so 0.7 * 10 is 7 and not 8
    n_train = min(max(math.ceil(Fraction(train_fraction) * n), 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])
