"""Partial dependence, ICE curves, link transforms and hull masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import convex_hull, inside_hull
from .models.base import CLASSIFICATION, Predictor
from .tabular import NUMERIC, Table
from .validation import check_int, check_variable, rng_from_seed

PROB_CLAMP = 1e-6


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Evaluation points for one variable.

    Numeric grids hold ascending values; categorical grids hold level codes
    (as floats) with their labels in ``levels``.
    """

    variable: str
    kind: str
    points: np.ndarray
    levels: tuple[str, ...] | None = None

    def __len__(self):
        return len(self.points)

    @property
    def labels(self) -> list:
        if self.kind == NUMERIC:
            return [float(v) for v in self.points]
        return [self.levels[int(c)] for c in self.points]

    def to_dict(self) -> dict:
        return {"variable": self.variable, "kind": self.kind,
                "points": [float(v) for v in self.points],
                "levels": list(self.levels) if self.levels is not None else None}


@dataclass(frozen=True, eq=False)
class PdpCurve:
    grid: Grid1D
    values: np.ndarray
    scale: str

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "values": [float(v) for v in self.values],
                "scale": self.scale}


@dataclass(frozen=True, eq=False)
class IceBundle:
    """Sampled ICE curves plus the mean over all rows (the PDP)."""

    grid: Grid1D
    curves: np.ndarray
    row_ids: np.ndarray
    mean: np.ndarray
    scale: str

    def as_pdp(self) -> PdpCurve:
        return PdpCurve(self.grid, self.mean, self.scale)


@dataclass(frozen=True, eq=False)
class PdpSurface:
    """Two-way partial dependence ``values[a, b]`` at ``(grid_j[a], grid_k[b])``."""

    grid_j: Grid1D
    grid_k: Grid1D
    values: np.ndarray
    mask: np.ndarray
    scale: str

    def to_dict(self) -> dict:
        return {
            "grid_j": self.grid_j.to_dict(),
            "grid_k": self.grid_k.to_dict(),
            "shape": list(self.values.shape),
            "values": [float(v) for v in self.values.ravel()],
            "mask": [bool(v) for v in self.mask.ravel()],
            "scale": self.scale,
        }


def make_grid(table: Table, var: str, size: int = 20, method: str = "equal") -> Grid1D:
    """Equally spaced (or quantile) points over the observed range of ``var``.

    Categorical variables get every observed level in stored order.
    """
    col = table[var]
    if col.kind != NUMERIC:
        codes = np.unique(col.values).astype(np.float64)
        return Grid1D(var, col.kind, codes, col.levels)
    size = check_int(size, "size")
    lo, hi = float(col.values.min()), float(col.values.max())
    if lo == hi:
        points = np.array([lo])
    elif method == "equal":
        points = np.linspace(lo, hi, size)
    elif method == "quantile":
        points = np.unique(np.quantile(col.values, np.linspace(0.0, 1.0, size)))
    else:
        raise ValueError(f"unknown grid method {method!r}")
    return Grid1D(var, NUMERIC, points)


def class_link(probs, mode: str = "near-logit", positive: int = 1) -> np.ndarray:
    """Map class probabilities to the link scale.

    ``binary-logit`` returns ``log(p / (1 - p))`` of the ``positive`` column;
    ``near-logit`` returns ``log p_k - mean_k log p_k`` for every class.
    Probabilities are clamped to ``[1e-6, 1 - 1e-6]`` first.
    """
    P = np.clip(np.asarray(probs, dtype=np.float64), PROB_CLAMP, 1.0 - PROB_CLAMP)
    if mode == "binary-logit":
        p = P[..., positive]
        return np.log(p) - np.log1p(-p)
    if mode == "near-logit":
        L = np.log(P)
        return L - L.mean(axis=-1, keepdims=True)
    raise ValueError(f"unknown link mode {mode!r}")


def output_scale(p: Predictor) -> str:
    if p.task_ != CLASSIFICATION:
        return "response"
    return "logit" if p.n_classes_ == 2 else "near-logit"


def link_output(p: Predictor, X, class_index: int | None = None) -> np.ndarray:
    """Model output on the scale used by partial dependence.

    Regression returns predictions. Binary classification returns the logit
    of class ``class_index`` (default the second class); multi-class returns
    the near-logit of class ``class_index`` (default the first class).
    """
    out = p.predict_output(X)
    if p.task_ != CLASSIFICATION:
        return out
    K = out.shape[1]
    if K == 2:
        return class_link(out, "binary-logit", 1 if class_index is None else class_index)
    return class_link(out, "near-logit")[:, 0 if class_index is None else class_index]


def _background(table: Table, p: Predictor, max_rows, seed) -> np.ndarray:
    X = p.coerce(table)
    if max_rows is not None and max_rows < X.shape[0]:
        rows = np.sort(rng_from_seed(seed).choice(X.shape[0], size=max_rows, replace=False))
        X = X[rows]
    return X


def _replicate(X: np.ndarray, cols, values) -> np.ndarray:
    """Stack one copy of ``X`` per row of ``values`` with ``cols`` overwritten."""
    values = np.asarray(values, dtype=np.float64).reshape(len(values), -1)
    block = np.repeat(X[None, :, :], len(values), axis=0)
    for c, col in enumerate(cols):
        block[:, :, col] = values[:, c][:, None]
    return block.reshape(-1, X.shape[1])


def _row_means(M: np.ndarray) -> np.ndarray:
    # the one reduction used for every PD average
    return M.sum(axis=-1) / M.shape[-1]


def model_points(p: Predictor, grid: Grid1D) -> np.ndarray:
    """Grid points in the model's coding (level codes follow the model's levels)."""
    if grid.kind == NUMERIC:
        return grid.points
    model_levels = p.schema_.levels[p.schema_.index(grid.variable)]
    if tuple(model_levels) == tuple(grid.levels):
        return grid.points
    lookup = {lv: i for i, lv in enumerate(model_levels)}
    return np.array([lookup[grid.levels[int(c)]] for c in grid.points], dtype=np.float64)


def ice_matrix(p: Predictor, X: np.ndarray, var_index: int, points,
               class_index: int | None = None) -> np.ndarray:
    """``out[g, i] = g(points[g], x_C(i))`` for every background row ``i``."""
    points = np.asarray(points, dtype=np.float64)
    out = link_output(p, _replicate(X, [var_index], points), class_index)
    return out.reshape(len(points), X.shape[0])


def pdp_1d(p: Predictor, table: Table, grid: Grid1D, class_index: int | None = None,
           max_rows: int | None = None, seed: int = 0) -> PdpCurve:
    """Average prediction with ``grid.variable`` fixed at each grid point."""
    X = _background(table, p, max_rows, seed)
    j = p.schema_.index(grid.variable)
    return PdpCurve(grid, _row_means(ice_matrix(p, X, j, model_points(p, grid), class_index)),
                    output_scale(p))


def ice(p: Predictor, table: Table, grid: Grid1D, max_curves: int = 30, seed: int = 0,
        class_index: int | None = None, strata=None) -> IceBundle:
    """ICE curves for every row; keeps a seeded sample of at most ``max_curves``.

    With ``strata`` (one label per row) up to ``max_curves`` rows are drawn
    from each stratum instead.
    """
    max_curves = check_int(max_curves, "max_curves")
    X = p.coerce(table)
    j = p.schema_.index(grid.variable)
    M = ice_matrix(p, X, j, model_points(p, grid), class_index)
    rng = rng_from_seed(seed)
    n = X.shape[0]
    if strata is None:
        rows = np.sort(rng.choice(n, size=min(max_curves, n), replace=False))
    else:
        strata = np.asarray(strata)
        picks = []
        for s in sorted(set(strata.tolist())):
            members = np.flatnonzero(strata == s)
            picks.append(rng.choice(members, size=min(max_curves, len(members)), replace=False))
        rows = np.sort(np.concatenate(picks))
    return IceBundle(grid, M[:, rows].T.copy(), rows, _row_means(M), output_scale(p))


def hull_mask(table: Table, var_j: str, var_k: str, grid_j: Grid1D, grid_k: Grid1D) -> np.ndarray:
    """``mask[a, b]`` is True when the grid point lies in the convex hull of the data."""
    shape = (len(grid_j), len(grid_k))
    if table[var_j].kind != NUMERIC or table[var_k].kind != NUMERIC:
        return np.ones(shape, dtype=bool)
    hull = convex_hull(zip(table[var_j].values, table[var_k].values))
    mask = np.zeros(shape, dtype=bool)
    for a, xj in enumerate(grid_j.points):
        for b, xk in enumerate(grid_k.points):
            mask[a, b] = inside_hull(hull, (xj, xk))
    return mask


def pdp_2d(p: Predictor, table: Table, grid_j: Grid1D, grid_k: Grid1D,
           class_index: int | None = None, max_rows: int | None = None,
           seed: int = 0) -> PdpSurface:
    """Average prediction over the cross product of two grids."""
    if grid_j.variable == grid_k.variable:
        raise ValueError("pdp_2d needs two different variables")
    check_variable(table, grid_j.variable)
    check_variable(table, grid_k.variable)
    X = _background(table, p, max_rows, seed)
    j = p.schema_.index(grid_j.variable)
    k = p.schema_.index(grid_k.variable)
    pj, pk = np.meshgrid(model_points(p, grid_j), model_points(p, grid_k), indexing="ij")
    pairs = np.column_stack([pj.ravel(), pk.ravel()])
    out = link_output(p, _replicate(X, [j, k], pairs), class_index)
    values = _row_means(out.reshape(len(pairs), X.shape[0])).reshape(pj.shape)
    mask = hull_mask(table, grid_j.variable, grid_k.variable, grid_j, grid_k)
    return PdpSurface(grid_j, grid_k, values, mask, output_scale(p))
