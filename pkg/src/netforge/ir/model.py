"""Model graph values: layers, connections, and the mutation operations.

IRModel is a value. Every mutation returns a new model; existing instances
are never modified, so models can be handed between threads freely. The
collaboration layer owns concurrent mutation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from netforge.errors import (
    DuplicateConnection,
    MalformedDocument,
    NotFound,
    SchemaViolation,
)
from netforge.ir.catalog import catalog_lookup

FORMAT_VERSION = 1

# param_update key reserved for canvas drag positions; not part of any schema
POSITION_KEY = "position"


@dataclass(frozen=True)
class TensorShape:
    """Channel-first dims without the batch axis, e.g. (C, H, W)."""

    dims: tuple

    def __post_init__(self):
        if not self.dims:
            raise ValueError("empty shape")
        for d in self.dims:
            if not isinstance(d, int) or d < 1:
                raise ValueError(f"shape dims must be positive integers, got {self.dims}")

    def count(self):
        n = 1
        for d in self.dims:
            n *= d
        return n

    def __iter__(self):
        return iter(self.dims)

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, i):
        return self.dims[i]


@dataclass(frozen=True)
class IRLayer:
    id: str
    layer_type: str
    display_name: str = ""
    params: dict = field(default_factory=dict)
    position_hint: Optional[tuple] = None

    def spec(self):
        return catalog_lookup(self.layer_type)

    def param(self, key, default=None):
        """Explicit value if set, else the schema default, else `default`."""
        if key in self.params:
            return self.params[key]
        schema = self.spec().param(key)
        if schema is not None and schema.default is not None:
            return list(schema.default) if isinstance(schema.default, (list, tuple)) else schema.default
        return default

    def with_param(self, key, value):
        params = dict(self.params)
        params[key] = value
        return IRLayer(self.id, self.layer_type, self.display_name, params, self.position_hint)

    def with_position(self, xy):
        return IRLayer(self.id, self.layer_type, self.display_name, dict(self.params),
                       (float(xy[0]), float(xy[1])) if xy is not None else None)

    def label(self):
        return self.display_name or self.id


@dataclass(frozen=True)
class IRModel:
    name: str = ""
    layers: dict = field(default_factory=dict)  # insertion-ordered id -> IRLayer
    connections: tuple = ()  # ordered (from_id, to_id) pairs

    def layer(self, layer_id) -> IRLayer:
        try:
            return self.layers[layer_id]
        except KeyError:
            raise NotFound(f"no layer {layer_id!r}") from None

    def has_connection(self, from_id, to_id):
        return (from_id, to_id) in set(self.connections)

    def parents(self, layer_id):
        return [f for f, t in self.connections if t == layer_id]

    def children(self, layer_id):
        return [t for f, t in self.connections if f == layer_id]

    def in_degree(self, layer_id):
        return sum(1 for _, t in self.connections if t == layer_id)

    def roots(self):
        targets = {t for _, t in self.connections}
        return [lid for lid in self.layers if lid not in targets]


def _check_param(layer_type, key, value):
    """Validate one param value against the schema; raise SchemaViolation."""
    spec = catalog_lookup(layer_type)
    schema = spec.param(key)
    if schema is None:
        raise SchemaViolation(f"{layer_type} has no parameter {key!r}")
    kind = schema.kind
    if kind == "checkbox":
        if not isinstance(value, bool):
            raise SchemaViolation(f"{key!r} expects a boolean, got {value!r}")
        return
    if kind in ("text", "select"):
        if not isinstance(value, str):
            raise SchemaViolation(f"{key!r} expects text, got {value!r}")
        if kind == "select" and schema.choices and value not in schema.choices:
            raise SchemaViolation(f"{key!r} must be one of {schema.choices}, got {value!r}")
        return
    # number kind: scalar, or an integer list when the param is per-dim
    if isinstance(value, (list, tuple)):
        if not schema.per_dim:
            raise SchemaViolation(f"{key!r} expects a scalar number, got a list")
        if not 1 <= len(value) <= 3:
            raise SchemaViolation(f"{key!r} list length must be 1..3, got {len(value)}")
        items = value
    else:
        items = [value]
    for v in items:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaViolation(f"{key!r} expects a number, got {v!r}")
        if isinstance(value, (list, tuple)) and not isinstance(v, int):
            raise SchemaViolation(f"{key!r} list entries must be integers, got {v!r}")
        if schema.min_value is not None and v < schema.min_value:
            raise SchemaViolation(f"{key!r} must be >= {schema.min_value}, got {v}")
        if schema.max_value is not None and v > schema.max_value:
            raise SchemaViolation(f"{key!r} must be <= {schema.max_value}, got {v}")


def check_layer_params(layer: IRLayer):
    for key, value in layer.params.items():
        _check_param(layer.layer_type, key, value)


def new_layer(layer_id, layer_type, display_name="", params=None, position_hint=None) -> IRLayer:
    """Build a schema-checked layer."""
    catalog_lookup(layer_type)  # raises UnknownLayerType
    layer = IRLayer(layer_id, layer_type, display_name, dict(params or {}),
                    tuple(position_hint) if position_hint else None)
    check_layer_params(layer)
    return layer


def back_edges(model: IRModel) -> set:
    """Edges closing a cycle, found by DFS in insertion order. Deterministic:
    the same model always yields the same back-edge set."""
    children = {lid: [] for lid in model.layers}
    for f, t in model.connections:
        children[f].append(t)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {lid: WHITE for lid in model.layers}
    back = set()
    for start in model.layers:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(children[start]))]
        color[start] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for child in it:
                if color[child] == GREY:
                    back.add((node, child))
                elif color[child] == WHITE:
                    color[child] = GREY
                    stack.append((child, iter(children[child])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return back


def depth_map(model: IRModel) -> dict:
    """Longest-path depth from any root, ignoring back-edges."""
    back = back_edges(model)
    indeg = {lid: 0 for lid in model.layers}
    children = {lid: [] for lid in model.layers}
    for edge in model.connections:
        if edge in back:
            continue
        f, t = edge
        indeg[t] += 1
        children[f].append(t)
    depth = {lid: 0 for lid in model.layers}
    queue = [lid for lid in model.layers if indeg[lid] == 0]
    i = 0
    while i < len(queue):
        node = queue[i]
        i += 1
        for child in children[node]:
            depth[child] = max(depth[child], depth[node] + 1)
            indeg[child] -= 1
            if indeg[child] == 0:
                queue.append(child)
    return depth


def deepest_layer(model: IRModel) -> Optional[str]:
    """Layer at maximum depth; ties broken by insertion order."""
    if not model.layers:
        return None
    depth = depth_map(model)
    best = None
    best_depth = -1
    for lid in model.layers:  # insertion order: first seen wins ties
        if depth[lid] > best_depth:
            best, best_depth = lid, depth[lid]
    return best


def add_layer(model: IRModel, layer: IRLayer, connections=None) -> IRModel:
    """Add a layer; with no explicit connections, attach the current deepest
    layer to the new one so palette clicks extend the network."""
    if layer.id in model.layers:
        raise SchemaViolation(f"duplicate layer id {layer.id!r}")
    catalog_lookup(layer.layer_type)
    check_layer_params(layer)
    layers = dict(model.layers)
    layers[layer.id] = layer
    new_edges = list(model.connections)
    if connections is None:
        anchor = deepest_layer(model)
        connections = [(anchor, layer.id)] if anchor is not None else []
    seen = set(new_edges)
    for f, t in connections:
        if f not in layers:
            raise NotFound(f"no layer {f!r}")
        if t not in layers:
            raise NotFound(f"no layer {t!r}")
        if (f, t) in seen:
            raise DuplicateConnection(f, t)
        _check_endpoints(layers[f], layers[t])
        new_edges.append((f, t))
        seen.add((f, t))
    return IRModel(model.name, layers, tuple(new_edges))


def delete_layer(model: IRModel, layer_id) -> IRModel:
    """Remove a layer and its incident connections. Neighbors are not
    auto-bridged; silent rewiring would hide edits from collaborators."""
    if layer_id not in model.layers:
        raise NotFound(f"no layer {layer_id!r}")
    layers = {lid: l for lid, l in model.layers.items() if lid != layer_id}
    edges = tuple((f, t) for f, t in model.connections if f != layer_id and t != layer_id)
    return IRModel(model.name, layers, edges)


def update_param(model: IRModel, layer_id, key, value) -> IRModel:
    layer = model.layer(layer_id)
    if key == POSITION_KEY:
        if value is not None:
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise SchemaViolation("position expects an [x, y] pair")
            value = (float(value[0]), float(value[1]))
        updated = layer.with_position(value)
    else:
        _check_param(layer.layer_type, key, value)
        if isinstance(value, tuple):
            value = list(value)
        updated = layer.with_param(key, value)
    layers = dict(model.layers)
    layers[layer_id] = updated
    return IRModel(model.name, layers, model.connections)


def _check_endpoints(src_layer: IRLayer, trg_layer: IRLayer):
    if not src_layer.spec().src_endpoints:
        raise SchemaViolation(
            f"{src_layer.layer_type} layer {src_layer.id!r} has no source endpoint")
    if not trg_layer.spec().trg_endpoints:
        raise SchemaViolation(
            f"{trg_layer.layer_type} layer {trg_layer.id!r} accepts no incoming connection")


def connect(model: IRModel, from_id, to_id) -> IRModel:
    src = model.layer(from_id)
    trg = model.layer(to_id)
    if model.has_connection(from_id, to_id):
        raise DuplicateConnection(from_id, to_id)
    _check_endpoints(src, trg)
    return IRModel(model.name, dict(model.layers), model.connections + ((from_id, to_id),))


def disconnect(model: IRModel, from_id, to_id) -> IRModel:
    if not model.has_connection(from_id, to_id):
        raise NotFound(f"no connection {from_id!r} -> {to_id!r}")
    edges = tuple(e for e in model.connections if e != (from_id, to_id))
    return IRModel(model.name, dict(model.layers), edges)


# ---------------------------------------------------------------------------
# Canonical JSON document. Key order is fixed; this is also the snapshot
# format replicated to collaboration clients, so it must serialize
# byte-identically for equal models.

def _canonical_param_items(layer: IRLayer):
    spec = layer.spec()
    order = {k: i for i, k in enumerate(spec.param_keys())}
    explicit = [(k, v) for k, v in layer.params.items()]
    explicit.sort(key=lambda kv: (order.get(kv[0], len(order)), kv[0]))
    return explicit


def model_to_doc(model: IRModel) -> dict:
    layers = []
    for layer in model.layers.values():
        layers.append({
            "id": layer.id,
            "type": layer.layer_type,
            "name": layer.display_name,
            "params": dict(_canonical_param_items(layer)),
            "position": list(layer.position_hint) if layer.position_hint else None,
        })
    return {
        "format_version": FORMAT_VERSION,
        "name": model.name,
        "layers": layers,
        "connections": [[f, t] for f, t in model.connections],
    }


def model_to_json(model: IRModel) -> str:
    return json.dumps(model_to_doc(model), separators=(",", ":"))


def model_from_doc(doc: dict) -> IRModel:
    if not isinstance(doc, dict) or "layers" not in doc:
        raise MalformedDocument("model document must contain layers")
    version = doc.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise MalformedDocument(f"unsupported format_version {version}")
    if not isinstance(doc["layers"], (list, tuple)):
        raise MalformedDocument("layers must be a list")
    layers = {}
    for entry in doc["layers"]:
        if not isinstance(entry, dict) or "id" not in entry or "type" not in entry:
            raise MalformedDocument(f"bad layer entry: {entry!r}")
        layer = new_layer(
            entry["id"],
            entry["type"],
            entry.get("name", ""),
            entry.get("params") or {},
            entry.get("position"),
        )
        if layer.id in layers:
            raise MalformedDocument(f"duplicate layer id {layer.id!r}")
        layers[layer.id] = layer
    connections = []
    for pair in doc.get("connections", []):
        try:
            f, t = pair
        except (TypeError, ValueError):
            raise MalformedDocument(f"bad connection entry: {pair!r}") from None
        if f not in layers or t not in layers:
            raise MalformedDocument(f"connection {f!r} -> {t!r} references a missing layer")
        connections.append((f, t))
    return IRModel(doc.get("name", ""), layers, tuple(connections))


def model_from_json(text: str) -> IRModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    return model_from_doc(doc)
