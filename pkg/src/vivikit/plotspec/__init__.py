"""Display specifications and their SVG / JSON renderers."""

from .builders import (gpdp_spec, heatmap_spec, network_spec, shared_limits, zigzag_position,
                       zpdp_spec, zpdp_surfaces)
from .colors import (DIVERGING, GREENS, OUT_OF_HULL, PURPLES, ColorScale, relative_luminance,
                     scale_for)
from .render import render_json, render_svg
from .spec import (SPEC_VERSION, Circle, Legend, Panel, Path, PlotSpec, Rect, Rug, Segment,
                   Text)

__all__ = [
    "ColorScale", "DIVERGING", "GREENS", "PURPLES", "OUT_OF_HULL", "relative_luminance", "scale_for",
    "PlotSpec", "Panel", "Legend", "Rect", "Circle", "Segment", "Path", "Text", "Rug",
    "SPEC_VERSION", "heatmap_spec", "network_spec", "gpdp_spec", "zpdp_spec", "zpdp_surfaces",
    "shared_limits", "zigzag_position", "render_svg", "render_json",
]
