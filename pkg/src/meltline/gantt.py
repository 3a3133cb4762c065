"""Gantt renderings of a day timeline: SVG 1.1 and fixed-width text."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .scenario import Scenario
from .schedule import EventKind, Timeline

PX_PER_MIN = 0.5
ROW_H = 28
LABEL_W = 90
TOP = 30

COLORS = {EventKind.MELT: "#d9822b", EventKind.CAST: "#2b6cb0"}


def _rows(scenario: Scenario) -> list:
    return [f.id for f in scenario.furnaces] + [t.id for t in scenario.tanks]


def _n(x: float) -> str:
    return f"{x:.2f}"


def render_svg(scenario: Scenario, timeline: Timeline) -> str:
    rows = _rows(scenario)
    H = timeline.horizon_min
    width = LABEL_W + H * PX_PER_MIN + 20
    height = TOP + ROW_H * len(rows) + 20
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_n(width)}" height="{_n(height)}" viewBox="0 0 {_n(width)} {_n(height)}">',
        f'<title>{escape(scenario.name or "schedule")}</title>',
        '<g font-family="monospace" font-size="11">',
    ]
    hours = int(H // 60)
    for h in range(0, hours + 1, 2):
        x = LABEL_W + h * 60 * PX_PER_MIN
        out.append(f'<line x1="{_n(x)}" y1="{TOP - 5}" x2="{_n(x)}" '
                   f'y2="{TOP + ROW_H * len(rows)}" stroke="#dddddd"/>')
        out.append(f'<text x="{_n(x)}" y="{TOP - 10}" text-anchor="middle">{h}h</text>')

    for i, rid in enumerate(rows):
        y = TOP + i * ROW_H
        out.append(f'<g class="row" id="row-{escape(rid)}">')
        out.append(f'<text x="4" y="{y + ROW_H // 2 + 4}">{escape(rid)}</text>')
        for ev in timeline.for_resource(rid):
            x = LABEL_W + ev.start_min * PX_PER_MIN
            if ev.kind is EventKind.POUR:
                out.append(f'<line class="pour" x1="{_n(x)}" y1="{y + 2}" x2="{_n(x)}" '
                           f'y2="{y + ROW_H - 2}" stroke="#c53030" stroke-width="2"/>')
                continue
            w = ev.duration * PX_PER_MIN
            out.append(
                f'<rect class="{ev.kind.value.lower()}" x="{_n(x)}" y="{y + 4}" '
                f'width="{_n(w)}" height="{ROW_H - 8}" fill="{COLORS[ev.kind]}">'
                f'<title>{ev.kind.value} #{ev.cycle_index} '
                f'{ev.start_min:.1f}-{ev.end_min:.1f} min</title></rect>'
            )
        out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_text(scenario: Scenario, timeline: Timeline, columns: int = 72) -> str:
    """One line per resource; ``M`` melting, ``C`` casting, ``|`` a pour, ``.`` idle."""
    H = timeline.horizon_min
    step = H / columns
    rows = _rows(scenario)
    label = max(len(r) for r in rows) + 1
    end = f"{H:g} min"
    lines = [" " * label + "0" + end.rjust(columns - 1)]
    for rid in rows:
        cells = ["."] * columns
        for ev in timeline.for_resource(rid):
            if ev.kind is EventKind.POUR:
                continue
            lo = int(ev.start_min / step + 1e-9)
            hi = math.ceil(ev.end_min / step - 1e-9)
            for c in range(max(lo, 0), min(hi, columns)):
                cells[c] = ev.kind.value[0]
        for ev in timeline.for_resource(rid):
            if ev.kind is EventKind.POUR:
                cells[min(int(ev.start_min / step), columns - 1)] = "|"
        lines.append(f"{rid:<{label}}" + "".join(cells))
    return "\n".join(lines) + "\n"
