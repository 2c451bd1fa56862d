"""Degree/adjacency precomputation and cycle detection for layout."""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["GraphIndex", "build_index", "detect_cycles"]


@dataclass
class GraphIndex:
    """One-pass degree and adjacency summary of a model graph.

    ``in_degree`` is the mutable countdown used by the placement loop;
    ``input_length`` / ``output_length`` stay fixed at the true parent and
    child counts. ``adjacency`` preserves connection declaration order.
    """

    in_degree: dict = field(default_factory=dict)
    out_degree: dict = field(default_factory=dict)
    input_length: dict = field(default_factory=dict)
    output_length: dict = field(default_factory=dict)
    adjacency: dict = field(default_factory=dict)
    parents: dict = field(default_factory=dict)


def build_index(model) -> GraphIndex:
    """Build all degree maps and the ordered adjacency in O(V + E)."""
    index = GraphIndex()
    for layer_id in model.layers:
        index.in_degree[layer_id] = 0
        index.out_degree[layer_id] = 0
        index.adjacency[layer_id] = []
        index.parents[layer_id] = []
    for from_id, to_id in model.connections:
        index.in_degree[to_id] += 1
        index.out_degree[from_id] += 1
        index.adjacency[from_id].append(to_id)
        index.parents[to_id].append(from_id)
    index.input_length = dict(index.in_degree)
    index.output_length = dict(index.out_degree)
    return index


_WHITE, _GREY, _BLACK = 0, 1, 2


def detect_cycles(index: GraphIndex) -> list:
    """Classify edges by iterative DFS and return the back-edge list.

    Deterministic: roots are tried in declaration order and children in
    adjacency order, so the same graph always yields the same edge set.
    """
    color = {layer_id: _WHITE for layer_id in index.adjacency}
    back_edges = []
    for root in index.adjacency:
        if color[root] != _WHITE:
            continue
        # Each stack frame tracks how far into the child list we are so the
        # walk can resume after returning from a descendant.
        stack = [(root, 0)]
        color[root] = _GREY
        while stack:
            node, child_pos = stack[-1]
            children = index.adjacency[node]
            if child_pos == len(children):
                stack.pop()
                color[node] = _BLACK
                continue
            stack[-1] = (node, child_pos + 1)
            child = children[child_pos]
            if color[child] == _GREY:
                back_edges.append((node, child))
            elif color[child] == _WHITE:
                color[child] = _GREY
                stack.append((child, 0))
    return back_edges
