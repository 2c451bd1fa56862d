"""Deterministic DAG layout: placement, routing, and rendering."""

from netforge.layout.graphindex import GraphIndex, build_index, detect_cycles
from netforge.layout.placement import LayoutConfig, OccupancyHash, compute_layout
from netforge.layout.routing import ConnectionPath, route_connections, segment_hits_rect
from netforge.layout.svg import layout_to_json, layout_to_svg

__all__ = [
    "GraphIndex", "build_index", "detect_cycles",
    "LayoutConfig", "OccupancyHash", "compute_layout",
    "ConnectionPath", "route_connections", "segment_hits_rect",
    "layout_to_json", "layout_to_svg",
]
