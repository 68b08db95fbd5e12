"""Spec builders for heatmaps, networks, generalized pairs and zigzag PDP displays."""

from __future__ import annotations

import math

import numpy as np

from ..arrange import Ordering
from ..geometry import convex_hull
from ..models.base import Predictor
from ..netgraph import EulerSequence, ViviGraph
from ..pdp import PdpSurface, _background, ice, link_output, make_grid, pdp_2d
from ..tabular import NUMERIC, Table
from ..validation import check_variable, rng_from_seed
from ..vivi import ViviMatrix, _map
from .colors import OUT_OF_HULL, QUALITATIVE, ColorScale, scale_for
from .spec import Circle, Legend, Panel, Path, PlotSpec, Rect, Rug, Segment, Text

CELL = 40.0
MARGIN = 90.0
PANEL = 140.0
GAP = 10.0
MAX_GPDP_VARS = 8


def _legend(title: str, scale: ColorScale, x: float, y: float) -> Legend:
    if scale.degenerate:
        return Legend(title, scale.name, (("%.6g" % scale.lo, scale.color(scale.lo)),), x, y)
    n = len(scale.colors)
    step = (scale.hi - scale.lo) / n
    entries = tuple(("%.6g" % (scale.lo + i * step), c) for i, c in enumerate(scale.colors))
    return Legend(title, scale.name, entries, x, y)


def shared_limits(*matrices: ViviMatrix) -> dict:
    """Scale limits covering several matrices, for side-by-side comparison."""
    imp = np.concatenate([m.importance for m in matrices])
    offs = [m.values[~np.eye(m.p, dtype=bool)] for m in matrices if m.p > 1]
    inter = np.concatenate(offs) if offs else np.zeros(1)
    return {"importance": (float(imp.min()), float(imp.max())),
            "interaction": (float(inter.min()), float(inter.max()))}


def heatmap_spec(M: ViviMatrix, order: Ordering | None = None, filter_top: int | None = None,
                 limits: dict | None = None) -> PlotSpec:
    """VIVI heatmap: importance on the diagonal (greens), interaction off it (purples).

    ``limits`` fixes both scale domains, e.g. from :func:`shared_limits`.
    """
    idx = list(range(M.p)) if order is None else list(order.order)
    if sorted(idx) != list(range(M.p)):
        raise ValueError("ordering is not a permutation of the matrix variables")
    if filter_top is not None:
        if filter_top < 1:
            raise ValueError("filter_top must be >= 1")
        idx = idx[:filter_top]
    q = len(idx)
    sub = M.values[np.ix_(idx, idx)]
    off = ~np.eye(q, dtype=bool)
    if limits is None:
        imp_scale = scale_for("importance", "greens", np.diag(sub))
        int_scale = scale_for("interaction", "purples", sub[off])
    else:
        imp_scale = ColorScale("importance", "greens", *map(float, limits["importance"]))
        int_scale = ColorScale("interaction", "purples", *map(float, limits["interaction"]))
    names = [M.names[i] for i in idx]
    marks = []
    for r in range(q):
        for c in range(q):
            v = float(sub[r, c])
            scale = imp_scale if r == c else int_scale
            marks.append(Rect(MARGIN + c * CELL, MARGIN + r * CELL, CELL, CELL, scale.color(v),
                              "#ffffff", 1.0, f"{names[r]}:{names[c]} = {v:.6g}"))
    for k, name in enumerate(names):
        mid = MARGIN + (k + 0.5) * CELL
        marks.append(Text(MARGIN - 6.0, mid + 4.0, name, 11.0, "end"))
        marks.append(Text(mid, MARGIN - 6.0, name, 11.0, "start", -90.0))
    side = MARGIN + q * CELL
    panel = Panel("heatmap", "heatmap", MARGIN, MARGIN, q * CELL, q * CELL, tuple(names),
                  tuple(marks), {"diagonal_cells": q, "values": [[float(v) for v in row] for row in sub]})
    legends = [_legend("Importance", imp_scale, side + 20.0, MARGIN)]
    int_legend = _legend("Interaction", int_scale, side + 120.0, MARGIN)
    if q < 2:
        int_legend = Legend("Interaction", "interaction", (), side + 120.0, MARGIN)
    legends.append(int_legend)
    return PlotSpec("heatmap", side + 220.0, max(side + 20.0, MARGIN + 260.0), (panel,),
                    (imp_scale, int_scale), tuple(legends),
                    meta={"measure": M.interaction_measure, "order": names})


def _unit(values: np.ndarray) -> np.ndarray:
    """Rescale to [0, 1]; a collapsed range maps to 1 (the scale maximum)."""
    lo, hi = values.min(), values.max()
    if not hi > lo:
        return np.ones_like(values)
    return (values - lo) / (hi - lo)


def _force_layout(n: int, edges, seed: int = 0, iterations: int = 200) -> np.ndarray:
    """Seeded Fruchterman-Reingold layout in the unit square."""
    pos = rng_from_seed(seed).uniform(0.0, 1.0, size=(n, 2))
    if n == 1:
        return np.array([[0.5, 0.5]])
    k = math.sqrt(1.0 / n)
    temp = 0.1
    for _ in range(iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((delta ** 2).sum(axis=-1)) + 1e-9
        disp = ((k * k / dist ** 2)[:, :, None] * delta).sum(axis=1)
        for i, j, w in edges:
            d = pos[i] - pos[j]
            f = (np.linalg.norm(d) / k) * (0.5 + w) * d
            disp[i] -= f
            disp[j] += f
        length = np.sqrt((disp ** 2).sum(axis=1)) + 1e-9
        pos += disp / length[:, None] * np.minimum(length, temp)[:, None]
        temp *= 0.98
    pos -= pos.min(axis=0)
    span = pos.max(axis=0)
    span[span == 0] = 1.0
    return pos / span


def network_spec(g: ViviGraph, layout: str = "radial", clusters: dict | None = None,
                 order: Ordering | None = None, seed: int = 0) -> PlotSpec:
    """Node-link display of a VIVI graph.

    Radial layouts run clockwise from twelve o'clock following ``order``
    (matrix order when omitted). Node size and fill follow importance; edge
    width and color follow interaction strength.
    """
    if layout not in ("radial", "force"):
        raise ValueError(f"unknown layout {layout!r}")
    size = 420.0
    if not g.nodes:
        return PlotSpec("network", size, size,
                        notice="No interactions above the threshold.",
                        meta={"threshold": g.threshold})
    nodes = list(g.nodes)
    if order is not None:
        rank = {v: r for r, v in enumerate(order.order)}
        nodes.sort(key=lambda v: rank[v])
    n = len(nodes)
    pos_of = {v: i for i, v in enumerate(nodes)}
    centre, radius = size / 2, size / 2 - 70.0
    if layout == "radial":
        ang = [-math.pi / 2 + 2 * math.pi * k / n for k in range(n)]
        xy = [(centre + radius * math.cos(a), centre + radius * math.sin(a)) for a in ang]
        if n == 1:
            xy = [(centre, centre)]
    else:
        local = [(pos_of[i], pos_of[j], w) for i, j, w in g.edges]
        unit = _force_layout(n, local, seed)
        xy = [(70.0 + float(a) * (size - 140.0), 70.0 + float(b) * (size - 140.0)) for a, b in unit]

    imp = np.array([float(g.importance[v]) for v in nodes])
    node_scale = scale_for("importance", "greens", imp)
    weights = np.array([w for _, _, w in g.edges]) if g.edges else np.zeros(0)
    edge_scale = scale_for("interaction", "purples", weights)
    marks = []
    if clusters:
        for lab in sorted(set(clusters.values())):
            members = [xy[pos_of[v]] for v in nodes if clusters.get(v) == lab]
            hull = convex_hull(members)
            color = QUALITATIVE[lab % len(QUALITATIVE)]
            if len(hull) >= 3:
                marks.append(Path(tuple(hull), color, 12.0, 0.25, color, True))
            else:
                marks.append(Path(tuple(hull) * (2 if len(hull) == 1 else 1), color, 24.0, 0.25))
    if len(weights):
        widths = 1.0 + 7.0 * _unit(weights)
        for (i, j, w), width in zip(g.edges, widths):
            (x1, y1), (x2, y2) = xy[pos_of[i]], xy[pos_of[j]]
            marks.append(Segment(x1, y1, x2, y2, edge_scale.color(w), float(width), 1.0,
                                 f"{g.names[i]}:{g.names[j]} = {w:.6g}"))
    radii = 8.0 + 14.0 * _unit(imp)
    for v, r in zip(nodes, radii):
        x, y = xy[pos_of[v]]
        marks.append(Circle(x, y, float(r), node_scale.color(g.importance[v]), "#444444", 1.0,
                            f"{g.names[v]} = {float(g.importance[v]):.6g}"))
        marks.append(Text(x, y - float(r) - 4.0, g.names[v], 11.0))
    panel = Panel("network", "network", 0.0, 0.0, size, size,
                  tuple(g.names[v] for v in nodes), tuple(marks),
                  {"nodes": n, "edges": len(g.edges), "layout": layout,
                   "clusters": {g.names[v]: int(c) for v, c in sorted((clusters or {}).items())}})
    legends = (_legend("Importance", node_scale, size + 10.0, 20.0),
               _legend("Interaction", edge_scale, size + 110.0, 20.0))
    return PlotSpec("network", size + 210.0, size, (panel,), (node_scale, edge_scale), legends,
                    meta={"threshold": g.threshold})


def _frame(x, y, w, h):
    return Rect(x, y, w, h, "none", "#888888")


def _polyline(xs, ys, x0, y0, w, h, xr, yr, stroke, width=1.0, opacity=1.0):
    def sx(v):
        return x0 + w * (0.5 if xr[1] == xr[0] else (v - xr[0]) / (xr[1] - xr[0]))

    def sy(v):
        return y0 + h - h * (0.5 if yr[1] == yr[0] else (v - yr[0]) / (yr[1] - yr[0]))
    return Path(tuple((float(sx(a)), float(sy(b))) for a, b in zip(xs, ys)), stroke, width, opacity)


def _span(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    return float(v.min()), float(v.max())


def _axis_pos(values, lo, hi, start, length, flip=False):
    t = np.full(len(values), 0.5) if hi == lo else (np.asarray(values, float) - lo) / (hi - lo)
    if flip:
        t = 1.0 - t
    return start + length * t


def _raster(surface: PdpSurface, x0, y0, w, h, scale: ColorScale, transpose=False):
    """Cells of a surface; ``transpose`` puts grid_j on the y axis."""
    vals, mask = surface.values, surface.mask
    if transpose:
        vals, mask = vals.T, mask.T
    nx, ny = vals.shape
    cw, ch = w / nx, h / ny
    marks = []
    for a in range(nx):
        for b in range(ny):
            fill = scale.color(vals[a, b]) if mask[a, b] else OUT_OF_HULL
            marks.append(Rect(x0 + a * cw, y0 + h - (b + 1) * ch, cw, ch, fill))
    return marks


def _level_curves(surface: PdpSurface, x0, y0, w, h, yr, numeric_first: bool):
    """One PD line per level with the numeric variable along x."""
    vals = surface.values if numeric_first else surface.values.T
    num_grid = surface.grid_j if numeric_first else surface.grid_k
    cat_grid = surface.grid_k if numeric_first else surface.grid_j
    xr = _span(num_grid.points)
    marks = []
    for lv in range(vals.shape[1]):
        color = QUALITATIVE[lv % len(QUALITATIVE)]
        marks.append(_polyline(num_grid.points, vals[:, lv], x0, y0, w, h, xr, yr, color, 1.5))
    for lv, label in enumerate(cat_grid.labels):
        marks.append(Text(x0 + w - 2.0, y0 + 10.0 + 10.0 * lv, str(label), 8.0, "end"))
    return marks


def gpdp_spec(p: Predictor, t: Table, vars, grid_size: int = 10, max_rows: int | None = 300,
              max_curves: int = 30, max_points: int = 500, seed: int = 0, threads: int = 1,
              class_index: int | None = None) -> PlotSpec:
    """Generalized pairs plot of partial dependence.

    Diagonal panels hold ICE curves with the PDP on top, the upper triangle
    holds bivariate PDP rasters (hull-masked) and the lower triangle the raw
    data colored by prediction. Rasters and points share one diverging scale
    whose limits span all bivariate surfaces.
    """
    vars = list(vars)
    if not 2 <= len(vars) <= MAX_GPDP_VARS:
        raise ValueError(f"gpdp needs between 2 and {MAX_GPDP_VARS} variables, got {len(vars)}")
    for v in vars:
        check_variable(t, v)
        p.schema_.index(v)
    q = len(vars)
    grids = {v: make_grid(t, v, grid_size) for v in vars}
    diag = _map(lambda v: ice(p, t, grids[v], max_curves, seed, class_index), vars, threads)
    pairs = [(i, j) for i in range(q) for j in range(i + 1, q)]
    surfaces = _map(lambda ij: pdp_2d(p, t, grids[vars[ij[0]]], grids[vars[ij[1]]], class_index,
                                      max_rows, seed), pairs, threads)
    all_vals = np.concatenate([s.values.ravel() for s in surfaces])
    scale = scale_for("prediction", "diverging", all_vals)

    X = _background(t, p, None, seed)
    rows = np.arange(X.shape[0])
    if len(rows) > max_points:
        rows = np.sort(rng_from_seed(seed).choice(len(rows), max_points, replace=False))
    yhat = link_output(p, X[rows], class_index)

    step = PANEL + GAP
    panels = []
    for i, v in enumerate(vars):
        b = diag[i]
        x0, y0 = MARGIN + i * step, MARGIN + i * step
        yr = _span(np.concatenate([b.curves.ravel(), b.mean]))
        marks = [_frame(x0, y0, PANEL, PANEL)]
        if b.grid.kind == NUMERIC:
            xr = _span(b.grid.points)
            for curve in b.curves:
                marks.append(_polyline(b.grid.points, curve, x0, y0, PANEL, PANEL, xr, yr,
                                       "#7f7f7f", 0.6, 0.5))
            marks.append(_polyline(b.grid.points, b.mean, x0, y0, PANEL, PANEL, xr, yr,
                                   "#000000", 2.0))
        else:
            xr = (-0.5, len(b.grid) - 0.5)
            pos = np.arange(len(b.grid), dtype=np.float64)
            for curve in b.curves:
                marks.append(_polyline(pos, curve, x0, y0, PANEL, PANEL, xr, yr, "#7f7f7f", 0.6, 0.5))
            marks.append(_polyline(pos, b.mean, x0, y0, PANEL, PANEL, xr, yr, "#000000", 2.0))
        marks.append(Text(x0 + PANEL / 2, y0 + 12.0, v, 11.0))
        panels.append(Panel(f"diag-{v}", "diagonal", x0, y0, PANEL, PANEL, (v,), tuple(marks),
                            {"curves": int(len(b.curves)), "scale": b.scale}))

    for (i, j), s in zip(pairs, surfaces):
        vi, vj = vars[i], vars[j]
        x0, y0 = MARGIN + j * step, MARGIN + i * step
        marks = [_frame(x0, y0, PANEL, PANEL)]
        num_i, num_j = grids[vi].kind == NUMERIC, grids[vj].kind == NUMERIC
        if num_i != num_j:
            marks += _level_curves(s, x0, y0, PANEL, PANEL, (scale.lo, scale.hi), num_i)
            style = "curves"
        else:
            # column variable vj along x, row variable vi along y
            marks += _raster(s, x0, y0, PANEL, PANEL, scale, transpose=True)
            style = "raster"
        panels.append(Panel(f"upper-{vi}-{vj}", "upper", x0, y0, PANEL, PANEL, (vi, vj),
                            tuple(marks), {"style": style}))

    for i in range(q):
        for j in range(i):
            vi, vj = vars[i], vars[j]
            x0, y0 = MARGIN + j * step, MARGIN + i * step
            xv = X[rows, p.schema_.index(vj)]
            yv = X[rows, p.schema_.index(vi)]
            xs = _axis_pos(xv, *_span(xv), x0 + 4.0, PANEL - 8.0)
            ys = _axis_pos(yv, *_span(yv), y0 + 4.0, PANEL - 8.0, flip=True)
            marks = [_frame(x0, y0, PANEL, PANEL)]
            marks += [Circle(float(a), float(b), 2.0, scale.color(c), None, 0.8)
                      for a, b, c in zip(xs, ys, yhat)]
            panels.append(Panel(f"lower-{vi}-{vj}", "lower", x0, y0, PANEL, PANEL, (vi, vj),
                                tuple(marks), {"points": int(len(rows))}))

    side = MARGIN + q * step
    legend = _legend("Prediction", scale, side + 10.0, MARGIN)
    return PlotSpec("gpdp", side + 110.0, side + 20.0, tuple(panels), (scale,), (legend,),
                    meta={"variables": vars, "grid_size": int(grid_size)})


def zigzag_position(k: int) -> tuple[int, int]:
    """Grid ``(row, column)`` of panel ``k``: right, down, right, down, ..."""
    return k // 2, (k + 1) // 2


def _orient_surface(s: PdpSurface, xvar: str, yvar: str) -> PdpSurface:
    if (s.grid_j.variable, s.grid_k.variable) == (xvar, yvar):
        return s
    if (s.grid_j.variable, s.grid_k.variable) == (yvar, xvar):
        return PdpSurface(s.grid_k, s.grid_j, s.values.T, s.mask.T, s.scale)
    raise ValueError(f"surface ({s.grid_j.variable}, {s.grid_k.variable}) does not match "
                     f"step ({xvar}, {yvar})")


def zpdp_spec(seq: EulerSequence, surfaces, table: Table | None = None,
              max_rug: int = 300, seed: int = 0) -> PlotSpec:
    """Zigzag display: one bivariate PDP per Eulerian step.

    Consecutive panels sit side by side or stacked so that the variable they
    share lies on their common axis. Each axis carries a rug of the observed
    values when ``table`` is given.
    """
    surfaces = list(surfaces)
    if len(surfaces) != len(seq.steps):
        raise ValueError(f"{len(seq.steps)} steps but {len(surfaces)} surfaces")
    if not surfaces:
        return PlotSpec("zpdp", 200.0, 100.0, notice="No interactions to display.")
    all_vals = np.concatenate([s.values.ravel() for s in surfaces])
    scale = scale_for("prediction", "diverging", all_vals)
    rug_rows = None
    if table is not None and table.n > max_rug:
        rug_rows = np.sort(rng_from_seed(seed).choice(table.n, max_rug, replace=False))

    def rug_values(var):
        col = table[var]
        vals = col.values.astype(np.float64)
        return vals if rug_rows is None else vals[rug_rows]

    panels = []
    max_r = max_c = 0
    for k, (step, s) in enumerate(zip(seq.steps, surfaces)):
        a, b = seq.names[step.a], seq.names[step.b]
        xvar, yvar = (a, b) if k % 2 == 0 else (b, a)
        s = _orient_surface(s, xvar, yvar)
        r, c = zigzag_position(k)
        max_r, max_c = max(max_r, r), max(max_c, c)
        x0, y0 = MARGIN + c * PANEL, MARGIN + r * PANEL
        marks = [_frame(x0, y0, PANEL, PANEL)]
        marks += _raster(s, x0, y0, PANEL, PANEL, scale)
        if table is not None:
            for axis, var, grid in (("x", xvar, s.grid_j), ("y", yvar, s.grid_k)):
                lo, hi = _span(grid.points)
                if grid.kind == NUMERIC:
                    vals = rug_values(var)
                else:
                    # level codes mapped onto the raster's cell centres
                    lookup = {lv: i for i, lv in enumerate(grid.labels)}
                    col = table[var]
                    codes = col.values if rug_rows is None else col.values[rug_rows]
                    vals = np.array([lookup.get(col.levels[int(cd)], 0) for cd in codes], float)
                    lo, hi = -0.5, len(grid) - 0.5
                if axis == "x":
                    pos = _axis_pos(vals, lo, hi, x0, PANEL)
                    marks.append(Rug("x", tuple(float(v) for v in pos), y0 + PANEL, 6.0))
                else:
                    pos = _axis_pos(vals, lo, hi, y0, PANEL, flip=True)
                    marks.append(Rug("y", tuple(float(v) for v in pos), x0, -6.0))
        marks.append(Text(x0 + PANEL / 2, y0 + PANEL + 18.0, xvar, 10.0))
        marks.append(Text(x0 - 14.0, y0 + PANEL / 2, yvar, 10.0, "middle", -90.0))
        panels.append(Panel(f"step-{k}", "zpdp", x0, y0, PANEL, PANEL, (xvar, yvar),
                            tuple(marks), {"step": k, "weight": float(step.weight),
                                           "revisited": bool(step.revisited),
                                           "added": bool(step.added),
                                           "component": int(step.component)}))
    width = MARGIN + (max_c + 1) * PANEL
    height = MARGIN + (max_r + 1) * PANEL + 30.0
    legend = _legend("Prediction", scale, width + 10.0, MARGIN)
    return PlotSpec("zpdp", width + 110.0, height, tuple(panels), (scale,), (legend,),
                    meta={"steps": len(seq.steps), "sequence": seq.node_names})


def zpdp_surfaces(p: Predictor, t: Table, seq: EulerSequence, grid_size: int = 10,
                  max_rows: int | None = 300, seed: int = 0, threads: int = 1,
                  class_index: int | None = None) -> list[PdpSurface]:
    """Bivariate PDPs for every step, oriented as :func:`zpdp_spec` draws them."""
    grids = {}

    def grid(v):
        if v not in grids:
            grids[v] = make_grid(t, v, grid_size)
        return grids[v]

    jobs = []
    for k, step in enumerate(seq.steps):
        a, b = seq.names[step.a], seq.names[step.b]
        xvar, yvar = (a, b) if k % 2 == 0 else (b, a)
        jobs.append((grid(xvar), grid(yvar)))
    return _map(lambda gg: pdp_2d(p, t, gg[0], gg[1], class_index, max_rows, seed), jobs, threads)
