"""Plot specification types with a lossless JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields

from .colors import ColorScale

SPEC_VERSION = 1
KINDS = ("heatmap", "network", "gpdp", "zpdp")


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float
    fill: str
    stroke: str | None = None
    opacity: float = 1.0
    title: str | None = None


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float
    fill: str
    stroke: str | None = None
    opacity: float = 1.0
    title: str | None = None


@dataclass(frozen=True)
class Segment:
    x1: float
    y1: float
    x2: float
    y2: float
    stroke: str
    width: float = 1.0
    opacity: float = 1.0
    title: str | None = None


@dataclass(frozen=True)
class Path:
    points: tuple[tuple[float, float], ...]
    stroke: str | None
    width: float = 1.0
    opacity: float = 1.0
    fill: str | None = None
    closed: bool = False


@dataclass(frozen=True)
class Text:
    x: float
    y: float
    text: str
    size: float = 10.0
    anchor: str = "middle"
    rotate: float = 0.0


@dataclass(frozen=True)
class Rug:
    """Tick marks along one panel edge; ``positions`` are canvas coordinates."""

    axis: str
    positions: tuple[float, ...]
    start: float
    length: float
    color: str = "#000000"
    opacity: float = 0.3


MARKS = {cls.__name__.lower(): cls for cls in (Rect, Circle, Segment, Path, Text, Rug)}


def mark_to_dict(mark) -> dict:
    d = {"type": type(mark).__name__.lower()}
    for f in fields(mark):
        v = getattr(mark, f.name)
        if f.name == "points":
            v = [[float(a), float(b)] for a, b in v]
        elif f.name == "positions":
            v = [float(a) for a in v]
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            v = float(v)
        d[f.name] = v
    return d


def mark_from_dict(d: dict):
    cls = MARKS[d["type"]]
    kw = {k: v for k, v in d.items() if k != "type"}
    if "points" in kw:
        kw["points"] = tuple((float(a), float(b)) for a, b in kw["points"])
    if "positions" in kw:
        kw["positions"] = tuple(float(a) for a in kw["positions"])
    return cls(**kw)


def _mark_numbers(mark):
    for f in fields(mark):
        v = getattr(mark, f.name)
        if f.name == "points":
            for a, b in v:
                yield a
                yield b
        elif f.name == "positions":
            yield from v
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            yield v


@dataclass(frozen=True)
class Panel:
    """One display area; ``variables`` names the variables it depicts."""

    id: str
    kind: str
    x: float
    y: float
    width: float
    height: float
    variables: tuple[str, ...]
    marks: tuple = ()
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "x": float(self.x), "y": float(self.y),
                "width": float(self.width), "height": float(self.height),
                "variables": list(self.variables),
                "marks": [mark_to_dict(m) for m in self.marks], "meta": self.meta}

    @classmethod
    def from_dict(cls, d) -> "Panel":
        return cls(d["id"], d["kind"], d["x"], d["y"], d["width"], d["height"],
                   tuple(d["variables"]), tuple(mark_from_dict(m) for m in d["marks"]),
                   d["meta"])


@dataclass(frozen=True)
class Legend:
    title: str
    scale: str
    entries: tuple[tuple[str, str], ...]
    x: float = 0.0
    y: float = 0.0

    def to_dict(self) -> dict:
        return {"title": self.title, "scale": self.scale,
                "entries": [list(e) for e in self.entries], "x": float(self.x), "y": float(self.y)}

    @classmethod
    def from_dict(cls, d) -> "Legend":
        return cls(d["title"], d["scale"], tuple(tuple(e) for e in d["entries"]), d["x"], d["y"])


@dataclass(frozen=True)
class PlotSpec:
    """A complete display: canvas, panels, color scales and legends."""

    kind: str
    width: float
    height: float
    panels: tuple[Panel, ...] = ()
    scales: tuple[ColorScale, ...] = ()
    legends: tuple[Legend, ...] = ()
    notice: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}")

    def panels_of(self, kind: str) -> list[Panel]:
        return [p for p in self.panels if p.kind == kind]

    def scale(self, name: str) -> ColorScale:
        for s in self.scales:
            if s.name == name:
                return s
        raise KeyError(name)

    def check(self) -> None:
        """Raise ``ValueError`` on non-finite coordinates."""
        nums = [self.width, self.height]
        for p in self.panels:
            nums += [p.x, p.y, p.width, p.height]
            for m in p.marks:
                nums.extend(_mark_numbers(m))
        for lg in self.legends:
            nums += [lg.x, lg.y]
        if not all(math.isfinite(v) for v in nums):
            raise ValueError("plot spec contains non-finite coordinates")

    def to_dict(self) -> dict:
        return {
            "spec_version": SPEC_VERSION,
            "kind": self.kind,
            "width": float(self.width),
            "height": float(self.height),
            "panels": [p.to_dict() for p in self.panels],
            "scales": [s.to_dict() for s in self.scales],
            "legends": [lg.to_dict() for lg in self.legends],
            "notice": self.notice,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d) -> "PlotSpec":
        if d.get("spec_version") != SPEC_VERSION:
            raise ValueError(f"unsupported spec_version {d.get('spec_version')!r}")
        return cls(d["kind"], d["width"], d["height"],
                   tuple(Panel.from_dict(p) for p in d["panels"]),
                   tuple(ColorScale.from_dict(s) for s in d["scales"]),
                   tuple(Legend.from_dict(lg) for lg in d["legends"]),
                   d["notice"], d["meta"])

    @classmethod
    def from_json(cls, text: str) -> "PlotSpec":
        return cls.from_dict(json.loads(text))
