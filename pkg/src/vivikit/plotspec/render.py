"""Deterministic SVG and JSON output for plot specs."""

from __future__ import annotations

import json
from xml.sax.saxutils import escape, quoteattr

from .spec import Circle, Path, PlotSpec, Rect, Rug, Segment, Text


def _n(v: float) -> str:
    s = format(float(v), ".6g")
    return "0" if s == "-0" else s


def _attrs(**kw) -> str:
    parts = []
    for key, val in kw.items():
        if val is None:
            continue
        name = key.rstrip("_").replace("_", "-")
        text = _n(val) if isinstance(val, (int, float)) and not isinstance(val, bool) else str(val)
        parts.append(f"{name}={quoteattr(text)}")
    return " ".join(parts)


def _opacity(v: float):
    return None if v == 1.0 else v


def _titled(tag: str, attrs: str, title: str | None) -> str:
    if title is None:
        return f"<{tag} {attrs}/>"
    return f"<{tag} {attrs}><title>{escape(title)}</title></{tag}>"


def _mark(m) -> list[str]:
    if isinstance(m, Rect):
        return [_titled("rect", _attrs(x=m.x, y=m.y, width=m.w, height=m.h, fill=m.fill,
                                       stroke=m.stroke, opacity=_opacity(m.opacity)), m.title)]
    if isinstance(m, Circle):
        return [_titled("circle", _attrs(cx=m.cx, cy=m.cy, r=m.r, fill=m.fill, stroke=m.stroke,
                                         opacity=_opacity(m.opacity)), m.title)]
    if isinstance(m, Segment):
        return [_titled("line", _attrs(x1=m.x1, y1=m.y1, x2=m.x2, y2=m.y2, stroke=m.stroke,
                                       stroke_width=m.width, opacity=_opacity(m.opacity)),
                        m.title)]
    if isinstance(m, Path):
        if not m.points:
            return []
        d = "M" + " L".join(f"{_n(x)},{_n(y)}" for x, y in m.points) + (" Z" if m.closed else "")
        return [f"<path {_attrs(d=d, fill=m.fill or 'none', stroke=m.stroke, stroke_width=m.width, stroke_linejoin='round', stroke_linecap='round', opacity=_opacity(m.opacity))}/>"]
    if isinstance(m, Text):
        tr = None
        if m.rotate:
            tr = f"rotate({_n(m.rotate)} {_n(m.x)} {_n(m.y)})"
        return [f"<text {_attrs(x=m.x, y=m.y, font_size=m.size, text_anchor=m.anchor, transform=tr)}>"
                f"{escape(m.text)}</text>"]
    if isinstance(m, Rug):
        if not m.positions:
            return []
        if m.axis == "x":
            d = " ".join(f"M{_n(p)},{_n(m.start)} l0,{_n(m.length)}" for p in m.positions)
        else:
            d = " ".join(f"M{_n(m.start)},{_n(p)} l{_n(m.length)},0" for p in m.positions)
        return [f"<path {_attrs(d=d, fill='none', stroke=m.color, stroke_width=1, stroke_opacity=m.opacity)}/>"]
    raise TypeError(f"unknown mark {type(m).__name__}")


def render_svg(spec: PlotSpec) -> str:
    """SVG 1.1 text; identical specs give identical bytes."""
    spec.check()
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'{_attrs(width=spec.width, height=spec.height)} '
           f'viewBox="0 0 {_n(spec.width)} {_n(spec.height)}" font-family="sans-serif">',
           f'<rect {_attrs(x=0, y=0, width=spec.width, height=spec.height, fill="#ffffff")}/>']
    for panel in spec.panels:
        out.append(f"<g {_attrs(class_='panel', data_kind=panel.kind, data_id=panel.id)}>")
        for m in panel.marks:
            out.extend(_mark(m))
        out.append("</g>")
    for lg in spec.legends:
        out.append(f"<g {_attrs(class_='legend', data_scale=lg.scale)}>")
        out.append(f"<text {_attrs(x=lg.x, y=lg.y, font_size=11)}>{escape(lg.title)}</text>")
        for k, (label, color) in enumerate(lg.entries):
            y = lg.y + 8 + 14 * k
            out.append(f"<rect {_attrs(x=lg.x, y=y, width=12, height=12, fill=color, stroke='#888888')}/>")
            out.append(f"<text {_attrs(x=lg.x + 16, y=y + 10, font_size=9)}>{escape(label)}</text>")
        out.append("</g>")
    if spec.notice:
        out.append(f"<text {_attrs(x=spec.width / 2, y=spec.height / 2, font_size=12, text_anchor='middle')}>"
                   f"{escape(spec.notice)}</text>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_json(spec: PlotSpec) -> str:
    """Lossless JSON with sorted keys."""
    return json.dumps(spec.to_dict(), sort_keys=True, indent=1) + "\n"
