"""Pinned color lookup tables and value-to-color scales."""

from __future__ import annotations

import math
from dataclasses import dataclass

# light to dark: larger values get darker colors
GREENS = ("#f7fcf5", "#e5f5e0", "#c7e9c0", "#a1d99b", "#74c476",
          "#41ab5d", "#238b45", "#006d2c", "#00441b")
PURPLES = ("#fcfbfd", "#efedf5", "#dadaeb", "#bcbddc", "#9e9ac8",
           "#807dba", "#6a51a3", "#54278f", "#3f007d")
# blue (low) through pale yellow to red (high)
DIVERGING = ("#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#ffffbf",
             "#fee090", "#fdae61", "#f46d43", "#d73027", "#a50026")
# qualitative colors for clusters and factor levels
QUALITATIVE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
               "#e6ab02", "#a6761d", "#666666")
OUT_OF_HULL = "#d9d9d9"

PALETTES = {"greens": GREENS, "purples": PURPLES, "diverging": DIVERGING}


def relative_luminance(hex_color: str) -> float:
    """WCAG relative luminance of a ``#rrggbb`` color."""
    chans = [int(hex_color[i:i + 2], 16) / 255.0 for i in (1, 3, 5)]
    lin = [c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4 for c in chans]
    return 0.2126 * lin[0] + 0.7152 * lin[1] + 0.0722 * lin[2]


@dataclass(frozen=True)
class ColorScale:
    """Maps ``[lo, hi]`` onto a palette by equal-width bins.

    A collapsed domain (``lo == hi``) maps every value to one color: the
    darkest for sequential palettes, the middle one for the diverging palette.
    Values outside the domain are clamped to the nearest end.
    """

    name: str
    palette: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.palette not in PALETTES:
            raise ValueError(f"unknown palette {self.palette!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise ValueError(f"bad scale domain [{self.lo}, {self.hi}]")

    @property
    def colors(self) -> tuple[str, ...]:
        return PALETTES[self.palette]

    @property
    def degenerate(self) -> bool:
        return not self.hi > self.lo

    def index(self, value: float) -> int:
        n = len(self.colors)
        if self.degenerate:
            return n // 2 if self.palette == "diverging" else n - 1
        t = (float(value) - self.lo) / (self.hi - self.lo)
        if not t > 0:  # also catches nan
            return 0
        return min(n - 1, int(t * n))

    def color(self, value: float) -> str:
        return self.colors[self.index(value)]

    def to_dict(self) -> dict:
        return {"name": self.name, "palette": self.palette, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, d) -> "ColorScale":
        return cls(d["name"], d["palette"], float(d["lo"]), float(d["hi"]))


def scale_for(name: str, palette: str, values) -> ColorScale:
    vals = [float(v) for v in values if math.isfinite(float(v))]
    if not vals:
        return ColorScale(name, palette, 0.0, 0.0)
    return ColorScale(name, palette, min(vals), max(vals))
