"""Connection routing: straight lines when clear, orthogonal detours when not."""
from __future__ import annotations

import math
from dataclasses import dataclass

from netforge.layout.graphindex import build_index, detect_cycles
from netforge.layout.placement import LayoutConfig

__all__ = ["ConnectionPath", "route_connections", "segment_hits_rect"]


@dataclass(frozen=True)
class ConnectionPath:
    from_id: str
    to_id: str
    polyline: tuple  # (x, y) waypoints, bottom-center of source to top-center of target


def segment_hits_rect(p1, p2, rect) -> bool:
    """True when the open segment passes through the rectangle's interior.

    Liang-Barsky clip against the closed rectangle; the clipped midpoint is
    then tested strictly inside, so a segment riding an edge does not count.
    """
    (x1, y1), (x2, y2) = p1, p2
    rx0, ry0, rx1, ry1 = rect
    dx, dy = x2 - x1, y2 - y1
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x1 - rx0),
        (dx, rx1 - x1),
        (-dy, y1 - ry0),
        (dy, ry1 - y1),
    ):
        if p == 0:
            if q < 0:
                return False
            continue
        t = q / p
        if p < 0:
            if t > t1:
                return False
            if t > t0:
                t0 = t
        else:
            if t < t0:
                return False
            if t < t1:
                t1 = t
    if t0 >= t1:
        return False
    tm = (t0 + t1) / 2.0
    mx, my = x1 + tm * dx, y1 + tm * dy
    return rx0 < mx < rx1 and ry0 < my < ry1


class _RectField:
    """Row-bucketed rectangle index so clearance checks skip distant rows."""

    def __init__(self, positions, config):
        self._config = config
        self._rows = {}
        self._rects = {}
        ch = config.cell_height
        for layer_id, (x, y) in positions.items():
            rect = (x, y, x + config.layer_width, y + config.layer_height)
            self._rects[layer_id] = rect
            for row in range(math.floor(y / ch), math.floor((y + config.layer_height) / ch) + 1):
                self._rows.setdefault(row, []).append(layer_id)

    def rect(self, layer_id):
        return self._rects[layer_id]

    def blockers(self, polyline, exempt):
        """Ids of rectangles whose interior is crossed by any segment."""
        ch = self._config.cell_height
        hits = []
        seen = set()
        for p1, p2 in zip(polyline, polyline[1:]):
            lo = min(p1[1], p2[1]) - self._config.layer_height
            hi = max(p1[1], p2[1]) + self._config.layer_height
            for row in range(math.floor(lo / ch), math.floor(hi / ch) + 1):
                for layer_id in self._rows.get(row, ()):
                    if layer_id in exempt or layer_id in seen:
                        continue
                    if segment_hits_rect(p1, p2, self._rects[layer_id]):
                        seen.add(layer_id)
                        hits.append(layer_id)
        return hits


def _gap_midline(col: int, config: LayoutConfig) -> float:
    # Midline of the horizontal gap to the right of integer column `col`.
    return col * config.cell_width + config.layer_width + config.hgap / 2.0


def route_connections(model, positions: dict, config: LayoutConfig = LayoutConfig()) -> list:
    """Produce one polyline per connection, declaration order preserved.

    Straight bottom-center to top-center when nothing is in the way. Blocked
    edges take a three-segment orthogonal detour through the nearest clear
    column-gap midline; back-edges and unroutable stragglers run along the
    outer left margin, which is clear by construction.
    """
    field = _RectField(positions, config)
    back = set(detect_cycles(build_index(model)))
    margin_x = min(x for x, _ in positions.values()) - config.hgap if positions else 0.0
    half_w = config.layer_width / 2.0
    half_gap = config.vgap / 2.0

    paths = []
    for from_id, to_id in model.connections:
        sx, sy = positions[from_id]
        tx, ty = positions[to_id]
        start = (sx + half_w, sy + config.layer_height)
        end = (tx + half_w, ty)
        exempt = {from_id, to_id}

        if (from_id, to_id) in back:
            paths.append(ConnectionPath(from_id, to_id, _margin_route(start, end, margin_x, half_gap)))
            continue

        if not field.blockers((start, end), exempt):
            paths.append(ConnectionPath(from_id, to_id, (start, end)))
            continue

        polyline = _detour(start, end, field, exempt, config)
        if polyline is None:
            polyline = _margin_route(start, end, margin_x, half_gap)
        paths.append(ConnectionPath(from_id, to_id, polyline))
    return paths


def _margin_route(start, end, margin_x, half_gap):
    # Down into the row gap, across to the margin, along it, and back in.
    out_y = start[1] + half_gap
    in_y = end[1] - half_gap
    return (
        start,
        (start[0], out_y),
        (margin_x, out_y),
        (margin_x, in_y),
        (end[0], in_y),
        end,
    )


def _detour(start, end, field, exempt, config):
    """Nearest clear vertical channel, scanning gap midlines outward."""
    mid = (start[0] + end[0]) / 2.0
    offset = config.layer_width + config.hgap / 2.0
    base = math.floor((mid - offset) / config.cell_width + 0.5)
    span = math.ceil(abs(start[0] - end[0]) / config.cell_width)
    for distance in range(span + 10):
        candidates = (base + distance, base - distance) if distance else (base,)
        for col in candidates:
            channel = _gap_midline(col, config)
            polyline = (start, (channel, start[1]), (channel, end[1]), end)
            if not field.blockers(polyline, exempt):
                return polyline
    return None
