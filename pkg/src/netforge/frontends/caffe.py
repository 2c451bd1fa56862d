"""Caffe prototxt import and export.

Import walks the parsed text-format tree: every `layer` message becomes one
IR layer, and blob names (`bottom`/`top`) become explicit connections. Caffe
allows in-place computation (bottom == top); the importer tracks the last
producer of each blob so in-place chains come out as sequential links.

Export emits the minimal prototxt that reimports isomorphically: params
equal to their schema default are omitted, ids become layer and blob names.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from netforge.errors import (
    MissingRequiredField,
    UnsupportedLayer,
)
from netforge.frontends.names import (
    CAFFE_PARAM_BLOCK,
    CAFFE_TYPE_OF,
    ir_type_name,
)
from netforge.frontends.padding import CUSTOM, resolve_padding
from netforge.ir.catalog import CAFFE, catalog_lookup
from netforge.ir.model import IRLayer, IRModel, new_layer
from netforge.ir.shapes import infer_shapes
from netforge.textproto import Ident, Message, Num, Str, parse_textproto, print_textproto

# Prototxt enum spellings accepted for numeric enum fields.
_POOL_ENUM = {0: "MAX", 1: "AVE"}
_ELTWISE_ENUM = {0: "PROD", 1: "SUM", 2: "MAX"}

_PER_DIM_KEYS = {"kernel", "stride", "pad", "dim"}
_WINDOWED = {"Convolution", "Deconvolution", "Pooling"}


@dataclass
class CaffeImport:
    model: IRModel
    warnings: list = field(default_factory=list)


def _scalar(node, where, warnings):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Str):
        return node.value
    if isinstance(node, Ident):
        if node.name in ("true", "false"):
            return node.name == "true"
        return node.name
    warnings.append(f"{where}: unexpected nested message, ignored")
    return None


def _int_list(msg, field_name):
    values = []
    for node in msg.get_all(field_name):
        if isinstance(node, Num):
            values.append(int(node.value))
    return values


def _shape_dims(block):
    """dim entries of a shape {...} submessage, or of the block itself."""
    shape = block.get("shape")
    target = shape if isinstance(shape, Message) else block
    return _int_list(target, "dim")


def _strip_batch(dims, batch_marker=None):
    """Caffe shape dims carry the batch axis first; the IR convention drops
    it. `batch_marker` restricts stripping to a specific leading value."""
    if len(dims) > 1 and (batch_marker is None or dims[0] == batch_marker):
        return dims[1:]
    return dims


def _map_param_block(ir_type, layer_name, block, warnings):
    """Translate one `<type>_param { ... }` message into IR params."""
    params = {}
    _, mapping = CAFFE_PARAM_BLOCK[ir_type]
    reverse = {v: k for k, v in mapping.items()}
    handled = set()

    for field_name, node in block.fields:
        if field_name == "shape":
            handled.add("shape")
            continue
        ir_key = reverse.get(field_name)
        if ir_key is None:
            warnings.append(
                f"layer {layer_name!r}: unmapped field "
                f"{field_name!r} ignored")
            continue
        if ir_key in _PER_DIM_KEYS:
            continue  # collected below via get_all
        value = _scalar(node, f"layer {layer_name!r}.{field_name}", warnings)
        if value is None:
            continue
        schema = catalog_lookup(ir_type).param(ir_key)
        if schema is not None and schema.kind == "number" and isinstance(value, (int, float)):
            value = value if isinstance(value, float) else int(value)
        if ir_key == "pool" and isinstance(value, (int, float)):
            value = _POOL_ENUM.get(int(value), "MAX")
        if ir_key == "operation" and isinstance(value, (int, float)):
            value = _ELTWISE_ENUM.get(int(value), "SUM")
        params[ir_key] = value

    for ir_key, field_name in mapping.items():
        if ir_key not in _PER_DIM_KEYS:
            continue
        values = _int_list(block, field_name)
        if not values:
            continue
        if len(values) == 1:
            # a bare kernel_size/stride/pad means "all spatial dims";
            # Caffe vision layers are 2-D here
            values = values * 2
        params[ir_key] = values
    return params


def import_caffe_detailed(text) -> CaffeImport:
    root = parse_textproto(text)
    warnings = []
    name_node = root.get("name")
    model_name = name_node.value if isinstance(name_node, Str) else ""

    layers = {}
    edges = []
    edge_set = set()
    blob_producer = {}

    def unique_id(base):
        if base not in layers:
            return base
        n = 2
        while f"{base}_{n}" in layers:
            n += 1
        warnings.append(f"duplicate layer name {base!r} renamed {base}_{n}")
        return f"{base}_{n}"

    # legacy top-level inputs: input: "data" + input_shape/input_dim
    legacy_inputs = [n.value for n in root.get_all("input") if isinstance(n, Str)]
    if legacy_inputs:
        legacy_dims = _int_list(root, "input_dim")
        shapes = [s for s in root.get_all("input_shape") if isinstance(s, Message)]
        for i, blob in enumerate(legacy_inputs):
            dims = []
            if i < len(shapes):
                dims = _int_list(shapes[i], "dim")
            elif legacy_dims[i * 4:(i + 1) * 4]:
                dims = legacy_dims[i * 4:(i + 1) * 4]
            lid = unique_id(blob)
            params = {"dim": _strip_batch(dims)} if dims else {}
            layers[lid] = new_layer(lid, "Input", blob, params)
            blob_producer[blob] = lid

    count = 0
    for node in root.get_all("layer"):
        if not isinstance(node, Message):
            continue
        count += 1
        name_node = node.get("name")
        raw_name = name_node.value if isinstance(name_node, Str) else f"layer_{count}"
        type_node = node.get("type")
        if not isinstance(type_node, Str):
            warnings.append(f"layer {raw_name!r}: missing type, skipped")
            continue
        ir_type = ir_type_name(type_node.value, CAFFE)
        lid = unique_id(raw_name)

        params = {}
        block_info = CAFFE_PARAM_BLOCK.get(ir_type)
        for field_name, sub in node.fields:
            if field_name in ("name", "type", "bottom", "top"):
                continue
            if not isinstance(sub, Message):
                warnings.append(f"layer {raw_name!r}: unmapped field {field_name!r} ignored")
                continue
            if block_info and field_name == block_info[0]:
                params.update(_map_param_block(ir_type, raw_name, sub, warnings))
                if ir_type == "Input":
                    dims = _shape_dims(sub)
                    if dims:
                        params["dim"] = _strip_batch(dims)
                elif ir_type == "Reshape":
                    dims = _shape_dims(sub)
                    if dims:
                        params["dim"] = _strip_batch(dims, batch_marker=0)
            else:
                warnings.append(
                    f"layer {raw_name!r}: unmapped block {field_name!r} ignored")

        spec = catalog_lookup(ir_type)
        for schema in spec.params:
            if schema.required and CAFFE in schema.frameworks and schema.key not in params:
                raise MissingRequiredField(lid, schema.key)

        layers[lid] = new_layer(lid, ir_type, raw_name, params)

        for b in node.get_all("bottom"):
            if not isinstance(b, Str):
                continue
            producer = blob_producer.get(b.value)
            if producer is None:
                warnings.append(
                    f"layer {raw_name!r}: input blob {b.value!r} has no producer")
                continue
            if not layers[producer].spec().src_endpoints:
                warnings.append(
                    f"layer {raw_name!r}: producer {producer!r} has no output, "
                    f"connection skipped")
                continue
            edge = (producer, lid)
            if edge in edge_set:
                warnings.append(f"duplicate connection {producer!r} -> {lid!r} skipped")
                continue
            if spec.trg_endpoints:
                edges.append(edge)
                edge_set.add(edge)
            else:
                warnings.append(
                    f"layer {raw_name!r} accepts no incoming connection, "
                    f"bottom {b.value!r} skipped")
        tops = [t.value for t in node.get_all("top") if isinstance(t, Str)]
        if spec.src_endpoints:
            for blob in tops or [lid]:
                blob_producer[blob] = lid

    return CaffeImport(IRModel(model_name, layers, tuple(edges)), warnings)


def import_caffe(text) -> IRModel:
    return import_caffe_detailed(text).model


# --- export ----------------------------------------------------------------

def _effective(layer: IRLayer, key):
    value = layer.param(key)
    if isinstance(value, tuple):
        value = list(value)
    return value


def _is_default(layer: IRLayer, key, value):
    schema = layer.spec().param(key)
    if schema is None or schema.default is None:
        return False
    default = schema.default
    if isinstance(default, tuple):
        default = list(default)
    return value == default


def _check_per_dim_ranks(layer: IRLayer):
    """Reject mixed explicit ranks (length-1 lists broadcast, so they never
    pin the rank)."""
    rank = None
    for key in ("kernel", "stride", "pad"):
        value = layer.params.get(key)
        if isinstance(value, (list, tuple)) and len(value) != 1:
            if rank is None:
                rank = len(value)
            elif rank != len(value):
                raise UnsupportedLayer(
                    layer.id, layer.layer_type, "caffe",
                    f"mixed per-dim ranks on {layer.id!r}")


def _emit_per_dim(block, field_name, values):
    values = list(values)
    if len(values) == 1 or (len(values) == 2 and values[0] == values[1]):
        block.add(field_name, Num(values[0]))
    else:
        for v in values:
            block.add(field_name, Num(v))


def _numeric_pads(model, layer, shapes_cache):
    """Numeric padding for a windowed layer, resolving same/valid modes."""
    mode = layer.param("padding_mode", CUSTOM)
    pad = _effective(layer, "pad")
    if isinstance(pad, (int, float)):
        pad = [int(pad)]
    if mode == CUSTOM:
        return [int(p) for p in pad]
    if shapes_cache.get("shapes") is None:
        shapes_cache["shapes"] = infer_shapes(model)
    shapes = shapes_cache["shapes"]
    parent = next((f for f, t in model.connections if t == layer.id), None)
    in_shape = shapes.get(parent)
    if in_shape is None:
        raise UnsupportedLayer(
            layer.id, layer.layer_type, "caffe",
            f"cannot resolve {mode!r} padding without an input shape")
    spatial = list(in_shape.dims[1:])
    rank = len(spatial)
    kernel = _effective(layer, "kernel")
    stride = _effective(layer, "stride")
    kernel = kernel * rank if len(kernel) == 1 else kernel
    stride = stride * rank if len(stride) == 1 else stride
    return list(resolve_padding(mode, spatial, kernel, stride))


def export_caffe(model: IRModel) -> str:
    root = Message()
    if model.name:
        root.add("name", Str(model.name))

    parents = {lid: [] for lid in model.layers}
    for f, t in model.connections:
        parents[t].append(f)

    shapes_cache = {"shapes": None}

    for layer in model.layers.values():
        spec = layer.spec()
        if CAFFE not in spec.frameworks:
            raise UnsupportedLayer(layer.id, layer.layer_type, "caffe")
        if layer.layer_type in _WINDOWED:
            _check_per_dim_ranks(layer)

        msg = Message()
        msg.add("name", Str(layer.id))
        msg.add("type", Str(CAFFE_TYPE_OF[layer.layer_type]))
        for p in parents[layer.id]:
            msg.add("bottom", Str(p))
        msg.add("top", Str(layer.id))

        block = Message()
        block_info = CAFFE_PARAM_BLOCK.get(layer.layer_type)
        if layer.layer_type == "Input":
            dims = layer.params.get("dim")
            if dims:
                shape = Message()
                shape.add("dim", Num(1))
                for d in dims:
                    shape.add("dim", Num(int(d)))
                block.add("shape", shape)
        elif layer.layer_type == "Reshape":
            dims = _effective(layer, "dim") or []
            shape = Message()
            shape.add("dim", Num(0))
            for d in dims:
                shape.add("dim", Num(int(d)))
            block.add("shape", shape)

        if block_info:
            _, mapping = block_info
            pads = None
            if layer.layer_type in _WINDOWED:
                pads = _numeric_pads(model, layer, shapes_cache)
            for ir_key, field_name in mapping.items():
                if ir_key == "pad":
                    if pads and any(pads):
                        _emit_per_dim(block, field_name, pads)
                    continue
                if ir_key in layer.params:
                    value = _effective(layer, ir_key)
                    if _is_default(layer, ir_key, value):
                        continue
                    if isinstance(value, list):
                        _emit_per_dim(block, field_name, value)
                    elif isinstance(value, bool):
                        block.add(field_name, Ident("true" if value else "false"))
                    elif isinstance(value, str):
                        if layer.layer_type == "Python":
                            block.add(field_name, Str(value))
                        else:
                            block.add(field_name, Ident(value))
                    else:
                        block.add(field_name, Num(value))
            if block.fields:
                msg.add(block_info[0], block)

        root.add("layer", msg)

    return print_textproto(root)
