"""Deterministic grid placement with occupancy-hash overlap avoidance."""
from __future__ import annotations

import math
from dataclasses import dataclass

from netforge.layout.graphindex import build_index, detect_cycles

__all__ = ["LayoutConfig", "OccupancyHash", "compute_layout"]


@dataclass(frozen=True)
class LayoutConfig:
    layer_width: float = 130.0
    layer_height: float = 40.0
    hgap: float = 60.0
    vgap: float = 40.0
    overlap_step: float = 0.0  # 0 means layer_height + vgap

    def __post_init__(self):
        for name in ("layer_width", "layer_height", "hgap", "vgap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.overlap_step < 0:
            raise ValueError("overlap_step must be strictly positive")
        if self.overlap_step == 0:
            object.__setattr__(self, "overlap_step", self.layer_height + self.vgap)

    @property
    def cell_width(self) -> float:
        return self.layer_width + self.hgap

    @property
    def cell_height(self) -> float:
        return self.layer_height + self.vgap


class OccupancyHash:
    """Grid-cell index of placed rectangles for constant-time overlap probes.

    Cell size equals one layout pitch, so a rectangle touches at most two
    cells horizontally and (for the default step) one vertically. Probes
    confirm candidate hits with an exact interval test, which keeps
    half-column neighbours from reading as false overlaps.
    """

    def __init__(self, config: LayoutConfig):
        self._config = config
        self._cells = {}
        self._rects = {}

    def _cell_span(self, x, y):
        cw, ch = self._config.cell_width, self._config.cell_height
        w, h = self._config.layer_width, self._config.layer_height
        return (
            math.floor(x / cw),
            math.floor((x + w) / cw),
            math.floor(y / ch),
            math.floor((y + h) / ch),
        )

    def overlaps(self, x, y) -> bool:
        """Would a rectangle at (x, y) intersect any placed rectangle?"""
        w, h = self._config.layer_width, self._config.layer_height
        cx0, cx1, cy0, cy1 = self._cell_span(x, y)
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                for other in self._cells.get((cx, cy), ()):
                    ox, oy = self._rects[other]
                    if abs(ox - x) < w and abs(oy - y) < h:
                        return True
        return False

    def place(self, layer_id, x, y):
        self._rects[layer_id] = (x, y)
        cx0, cx1, cy0, cy1 = self._cell_span(x, y)
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                self._cells.setdefault((cx, cy), []).append(layer_id)


def _snap_half(value: float) -> float:
    """Snap to the nearest half-column, ties resolved upward."""
    return math.floor(value * 2.0 + 0.5) / 2.0


def compute_layout(model, config: LayoutConfig = LayoutConfig()) -> dict:
    """Assign a top-left pixel position to every layer.

    Placement order is an in-degree countdown over the graph with back-edges
    removed, seeded with every source node (first-declared popping first).
    Children of a sole fan-out parent are committed as one band so they stay
    on a common row; everything else resolves overlap by stepping straight
    down until the occupancy probe reports a free spot.
    """
    index = build_index(model)
    back = set(detect_cycles(index))

    countdown = dict(index.in_degree)
    eff_parents = {lid: list(ps) for lid, ps in index.parents.items()}
    eff_children = {lid: list(cs) for lid, cs in index.adjacency.items()}
    for from_id, to_id in back:
        countdown[to_id] -= 1
        eff_parents[to_id].remove(from_id)
        eff_children[from_id].remove(to_id)

    cw, ch = config.cell_width, config.cell_height
    occupancy = OccupancyHash(config)
    positions = {}
    cols = {}

    def settle(layer_id, col, y):
        while occupancy.overlaps(col * cw, y):
            y += config.overlap_step
        occupancy.place(layer_id, col * cw, y)
        positions[layer_id] = (col * cw, y)
        cols[layer_id] = col

    roots = [lid for lid in model.layers if countdown[lid] == 0]
    stack = list(reversed(roots))
    next_root_col = 0

    while stack:
        node = stack.pop()
        if node not in positions:
            parents = eff_parents[node]
            if not parents:
                settle(node, next_root_col, 0.0)
                next_root_col = cols[node] + 1
            elif len(parents) > 1:
                col = _snap_half(sum(cols[p] for p in parents) / len(parents))
                y = max(positions[p][1] for p in parents) + ch
                settle(node, col, y)
            else:
                parent = parents[0]
                band = [c for c in eff_children[parent] if len(eff_parents[c]) == 1]
                if len(band) == 1:
                    settle(node, cols[parent], positions[parent][1] + ch)
                else:
                    # Whole band is committed at its first member's pop so all
                    # siblings land on one row; later members skip placement.
                    first = cols[parent] - (len(band) - 1) / 2.0
                    band_cols = [_snap_half(first + i) for i in range(len(band))]
                    y = positions[parent][1] + ch
                    while any(
                        occupancy.overlaps(c * cw, y) for c in band_cols
                    ):
                        y += config.overlap_step
                    for sib, col in zip(band, band_cols):
                        occupancy.place(sib, col * cw, y)
                        positions[sib] = (col * cw, y)
                        cols[sib] = col
        for child in reversed(eff_children[node]):
            countdown[child] -= 1
            if countdown[child] == 0:
                stack.append(child)

    return positions
