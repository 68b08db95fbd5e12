"""Input validation helpers shared by the estimators and analysis functions."""

from __future__ import annotations

import numbers

import numpy as np

from .tabular import DataError, Table


def check_table(X, y=None) -> Table:
    """Accept a :class:`Table` or array-like ``X`` (plus optional ``y``).

    A string ``y`` with a table selects the response column.
    """
    if isinstance(X, Table):
        if y is None:
            return X
        if isinstance(y, str):
            return X.with_response(y)
        raise DataError("pass the response as a column name when X is a Table")
    return Table.from_arrays(X, y)


def check_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_variable(table: Table, name: str) -> str:
    if name not in table:
        raise KeyError(f"unknown variable {name!r}")
    if name == table.response:
        raise ValueError(f"{name!r} is the response, not a predictor")
    return name


def rng_from_seed(seed) -> np.random.Generator:
    """All randomness goes through numpy's PCG64 generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
