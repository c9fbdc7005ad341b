"""SVG figures: workspace, obstacles, trajectories and a path-cost panel."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Optional, Sequence

from .sim import TrajectoryTrace, _leave_points_from_labels
from .world import Environment

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"]
DASHES = ["", "6 3", "2 2", "8 3 2 3"]


def _fmt(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".")


class _Frame:
    """Maps world feet to SVG pixels with y pointing up."""

    def __init__(self, env: Environment, width: float, pad: float):
        (x0, y0), (x1, y1) = env.bounds.min, env.bounds.max
        self.x0, self.y1 = x0, y1
        self.scale = (width - 2 * pad) / (x1 - x0)
        self.pad = pad
        self.width = width
        self.height = (y1 - y0) * self.scale + 2 * pad

    def xy(self, x: float, y: float) -> tuple:
        return self.pad + (x - self.x0) * self.scale, self.pad + (self.y1 - y) * self.scale

    def points(self, pts) -> str:
        return " ".join(f"{_fmt(u)},{_fmt(v)}" for u, v in (self.xy(x, y) for x, y in pts))


def _marker(parent, frame: _Frame, p, cls: str, fill: str, r: float = 4.0):
    cx, cy = frame.xy(p[0], p[1])
    ET.SubElement(parent, "circle", {"class": cls, "cx": _fmt(cx), "cy": _fmt(cy), "r": _fmt(r), "fill": fill})


def render_svg(
    env: Environment,
    traces: Sequence[TrajectoryTrace],
    labels: Optional[Sequence[str]] = None,
    width: float = 800.0,
    cost_panel: bool = True,
) -> str:
    """Render traces over the scenario; returns the SVG document as text.

    Each trace gets one ``<g class="trace" data-trace="<index>">`` holding
    its polyline and leave-point markers, so every input appears exactly once.
    """
    if labels is None:
        labels = [tr.algorithm.value if tr.algorithm is not None else f"trace{i}" for i, tr in enumerate(traces)]
    if len(labels) != len(traces):
        raise ValueError("one label per trace")
    pad = 20.0
    frame = _Frame(env, width, pad)
    legend_h = 18.0 * len(traces) + 10.0
    panel_h = 180.0 if cost_panel and traces else 0.0
    total_h = frame.height + legend_h + panel_h
    svg = ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "width": _fmt(width),
            "height": _fmt(total_h),
            "viewBox": f"0 0 {_fmt(width)} {_fmt(total_h)}",
        },
    )
    ET.SubElement(svg, "title").text = env.name

    corners = env.bounds.corners()
    ET.SubElement(
        svg,
        "polygon",
        {"class": "bounds", "points": frame.points(corners), "fill": "white", "stroke": "black", "stroke-width": "1"},
    )
    obstacles = ET.SubElement(svg, "g", {"class": "obstacles"})
    for k, poly in enumerate(env.obstacles):
        ET.SubElement(
            obstacles,
            "polygon",
            {
                "class": "obstacle",
                "data-obstacle": str(k),
                "points": frame.points(tuple(v) for v in poly.vertices),
                "fill": "#9e9e9e",
                "stroke": "#424242",
            },
        )

    paths = ET.SubElement(svg, "g", {"class": "traces"})
    for i, tr in enumerate(traces):
        colour = PALETTE[i % len(PALETTE)]
        group = ET.SubElement(paths, "g", {"class": "trace", "data-trace": str(i), "data-label": labels[i]})
        attrs = {
            "class": "path",
            "points": frame.points(tuple(s.pose.position) for s in tr.samples),
            "fill": "none",
            "stroke": colour,
            "stroke-width": "2",
        }
        dash = DASHES[i % len(DASHES)]
        if dash:
            attrs["stroke-dasharray"] = dash
        ET.SubElement(group, "polyline", attrs)
        leaves = tr.leave_points or _leave_points_from_labels(tr.samples)
        for p in leaves:
            cx, cy = frame.xy(p.x, p.y)
            ET.SubElement(
                group,
                "rect",
                {
                    "class": "leave-point",
                    "x": _fmt(cx - 3),
                    "y": _fmt(cy - 3),
                    "width": "6",
                    "height": "6",
                    "fill": colour,
                },
            )

    _marker(svg, frame, tuple(env.start), "start", "#2e7d32", 5.0)
    _marker(svg, frame, tuple(env.goal), "goal", "#c62828", 5.0)

    legend = ET.SubElement(svg, "g", {"class": "legend"})
    y = frame.height + 14.0
    for i, label in enumerate(labels):
        colour = PALETTE[i % len(PALETTE)]
        ET.SubElement(
            legend,
            "line",
            {"class": "legend-key", "x1": "20", "y1": _fmt(y - 4), "x2": "50", "y2": _fmt(y - 4), "stroke": colour, "stroke-width": "2"},
        )
        ET.SubElement(legend, "text", {"x": "58", "y": _fmt(y), "font-size": "12", "font-family": "sans-serif"}).text = label
        y += 18.0

    if panel_h:
        _cost_panel(svg, traces, frame.height + legend_h, width, panel_h)

    ET.indent(svg)
    return ET.tostring(svg, encoding="unicode") + "\n"


def _cost_panel(svg, traces, top: float, width: float, height: float):
    """Remaining goal distance against time, one series per trace."""
    g = ET.SubElement(svg, "g", {"class": "cost-panel"})
    left, right, pad = 50.0, 20.0, 20.0
    t_max = max((tr.samples[-1].t for tr in traces if tr.samples), default=0.0) or 1.0
    d_max = max((s.d_goal for tr in traces for s in tr.samples), default=0.0) or 1.0
    w = width - left - right
    h = height - 2 * pad
    y0 = top + pad
    ET.SubElement(
        g, "rect", {"x": _fmt(left), "y": _fmt(y0), "width": _fmt(w), "height": _fmt(h), "fill": "none", "stroke": "black"}
    )
    ET.SubElement(g, "text", {"x": _fmt(left), "y": _fmt(y0 - 5), "font-size": "11", "font-family": "sans-serif"}).text = (
        f"goal distance (0-{d_max:.1f} ft) vs time (0-{t_max:.1f} s)"
    )
    for i, tr in enumerate(traces):
        # decimate long traces; the shape is all that matters here
        stride = max(1, len(tr.samples) // 2000)
        pts = tr.samples[::stride] + ([tr.samples[-1]] if (len(tr.samples) - 1) % stride else [])
        coords = " ".join(f"{_fmt(left + s.t / t_max * w)},{_fmt(y0 + h - s.d_goal / d_max * h)}" for s in pts)
        ET.SubElement(
            g,
            "polyline",
            {"class": "cost", "points": coords, "fill": "none", "stroke": PALETTE[i % len(PALETTE)], "stroke-width": "1.5"},
        )
