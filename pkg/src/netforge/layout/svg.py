"""SVG and JSON rendering of a computed layout."""
from __future__ import annotations

import json
from xml.sax.saxutils import escape

from netforge.ir.catalog import catalog_lookup
from netforge.layout.placement import LayoutConfig

__all__ = ["layout_to_svg", "layout_to_json"]

_MARGIN = 20.0


def _fmt(value: float) -> str:
    # Trim trailing .0 so coordinates stay stable and compact.
    return f"{value:g}"


def _translated(positions, paths, config):
    """Shift everything so the minimum coordinate lands on the margin."""
    xs = [x for x, _ in positions.values()]
    ys = [y for _, y in positions.values()]
    for path in paths:
        xs.extend(px for px, _ in path.polyline)
        ys.extend(py for _, py in path.polyline)
    dx = _MARGIN - min(xs, default=0.0)
    dy = _MARGIN - min(ys, default=0.0)
    moved_positions = {lid: (x + dx, y + dy) for lid, (x, y) in positions.items()}
    moved_paths = [
        (path.from_id, path.to_id, tuple((x + dx, y + dy) for x, y in path.polyline))
        for path in paths
    ]
    width = max((x for x, _ in moved_positions.values()), default=0.0) + config.layer_width + _MARGIN
    height = max((y for _, y in moved_positions.values()), default=0.0) + config.layer_height + _MARGIN
    for _, _, polyline in moved_paths:
        for x, y in polyline:
            width = max(width, x + _MARGIN)
            height = max(height, y + _MARGIN)
    return moved_positions, moved_paths, width, height


def layout_to_svg(model, positions: dict, paths: list, config: LayoutConfig = LayoutConfig()) -> str:
    """Standalone SVG: one labelled rect per layer, one polyline per connection."""
    moved_positions, moved_paths, width, height = _translated(positions, paths, config)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
        '<path d="M 0 0 L 10 5 L 0 10 z" fill="#555"/></marker>',
        "</defs>",
    ]
    for from_id, to_id, polyline in moved_paths:
        points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in polyline)
        lines.append(
            f'<polyline points="{points}" fill="none" stroke="#555" '
            f'stroke-width="1.5" marker-end="url(#arrow)" '
            f'data-from="{escape(from_id, {chr(34): "&quot;"})}" '
            f'data-to="{escape(to_id, {chr(34): "&quot;"})}"/>'
        )
    for layer_id, (x, y) in moved_positions.items():
        layer = model.layers[layer_id]
        color = catalog_lookup(layer.layer_type).color
        label = escape(layer.label())
        lines.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(config.layer_width)}" '
            f'height="{_fmt(config.layer_height)}" rx="4" fill="{color}" '
            f'stroke="#333" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{_fmt(x + config.layer_width / 2)}" '
            f'y="{_fmt(y + config.layer_height / 2 + 4)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" fill="#fff">{label}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def layout_to_json(positions: dict, paths: list) -> str:
    """Layout dump for UI consumption: {positions: {id: [x, y]}, paths: [...]}."""
    doc = {
        "positions": {lid: [x, y] for lid, (x, y) in positions.items()},
        "paths": [
            {
                "from": path.from_id,
                "to": path.to_id,
                "points": [[x, y] for x, y in path.polyline],
            }
            for path in paths
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
