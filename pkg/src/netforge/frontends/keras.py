"""Keras functional-API JSON import and export.

Import accepts Model/Functional graphs and Sequential configs (converted to
functional chains). Keras is channels_last; the IR is channel-first, so
shapes and axes are transposed both ways. "same"/"valid" padding becomes
numeric padding by walking the graph in topological order and applying the
output-size arithmetic, and ZeroPadding layers fold into the windowed layer
they feed.

Export emits one functional-API JSON document. Numeric padding becomes
"same" when it is exactly same-equivalent for the known input shape,
otherwise "valid" plus an explicit ZeroPadding layer. LRN has no stock
Keras class; exporting it requires the custom-layer registry, and Python
layers never export.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from netforge.errors import (
    MalformedDocument,
    MissingInputShape,
    MissingRequiredField,
    UnknownLayerType,
    UnsupportedLayer,
)
from netforge.frontends.names import (
    ACTIVATION_TO_IR,
    ELTWISE_TO_KERAS,
    IR_TYPE_OF_KERAS,
    KERAS_TO_ELTWISE,
)
from netforge.frontends.padding import CUSTOM, SAME, VALID, resolve_padding
from netforge.ir.catalog import KERAS, catalog_lookup
from netforge.ir.model import IRLayer, IRModel, new_layer
from netforge.ir.shapes import infer_shapes, layer_output_shape

_WINDOWED = {"Convolution", "Deconvolution", "Pooling"}

_CONV_CLASS = {1: "Conv1D", 2: "Conv2D", 3: "Conv3D"}
_DECONV_CLASS = {1: "Conv1DTranspose", 2: "Conv2DTranspose", 3: "Conv3DTranspose"}
_MAXPOOL_CLASS = {1: "MaxPooling1D", 2: "MaxPooling2D", 3: "MaxPooling3D"}
_AVGPOOL_CLASS = {1: "AveragePooling1D", 2: "AveragePooling2D", 3: "AveragePooling3D"}
_ZEROPAD_CLASS = {1: "ZeroPadding1D", 2: "ZeroPadding2D", 3: "ZeroPadding3D"}
_ZEROPAD_TYPES = set(_ZEROPAD_CLASS.values())

_POOL_CLASS_KIND = {}
for _r, _c in _MAXPOOL_CLASS.items():
    _POOL_CLASS_KIND[_c] = ("MAX", _r)
for _r, _c in _AVGPOOL_CLASS.items():
    _POOL_CLASS_KIND[_c] = ("AVE", _r)

_CLASS_RANK = {}
for _table in (_CONV_CLASS, _DECONV_CLASS, _MAXPOOL_CLASS, _AVGPOOL_CLASS, _ZEROPAD_CLASS):
    for _r, _c in _table.items():
        _CLASS_RANK[_c] = _r


@dataclass
class KerasImport:
    model: IRModel
    warnings: list = field(default_factory=list)


def _to_channel_first(dims):
    dims = list(dims)
    if len(dims) >= 2:
        return [dims[-1]] + dims[:-1]
    return dims


def _to_channel_last(dims):
    dims = list(dims)
    if len(dims) >= 2:
        return dims[1:] + [dims[0]]
    return dims


def _int_seq(value, rank):
    if isinstance(value, (int, float)):
        return [int(value)] * rank
    return [int(v) for v in value]


def _entry_name(entry):
    name = entry.get("name") or entry.get("config", {}).get("name")
    if not name:
        raise MalformedDocument("layer entry without a name")
    return name


def _symmetric_zeropad(config, rank, name):
    """Per-dim pad amounts from a ZeroPadding config; asymmetric pairs are
    not representable as numeric padding."""
    padding = config.get("padding", 1)
    if isinstance(padding, int):
        return [padding] * rank

    def check_pair(i, before, after):
        if before != after:
            raise MalformedDocument(
                f"ZeroPadding layer {name!r} pads dim {i} asymmetrically "
                f"({before}, {after}); only symmetric padding is representable")
        return int(before)

    # the 1-D class writes one flat (before, after) pair, not a list per dim
    if rank == 1 and len(padding) == 2 and all(isinstance(v, int) for v in padding):
        return [check_pair(0, padding[0], padding[1])]
    pads = []
    for i, entry in enumerate(padding):
        if isinstance(entry, int):
            pads.append(entry)
        else:
            pads.append(check_pair(i, entry[0], entry[1]))
    if len(pads) == 1:
        pads = pads * rank
    return pads


def _map_layer(class_name, config, name, warnings):
    """(ir_type, params, pending_same, pending_axis) for one layer entry."""
    params = {}
    pending_same = False
    pending_axis = None

    if class_name == "Activation":
        act = config.get("activation", "linear")
        ir_type = ACTIVATION_TO_IR.get(act)
        if ir_type is None:
            raise UnknownLayerType(f"Activation({act!r})")
        return ir_type, params, False, None

    ir_type = IR_TYPE_OF_KERAS.get(class_name)
    if ir_type is None:
        raise UnknownLayerType(class_name)

    def mode_of(cfg):
        mode = cfg.get("padding", "valid")
        if mode not in (SAME, VALID):
            raise MalformedDocument(
                f"layer {name!r}: unknown padding mode {mode!r}")
        return mode

    if ir_type in ("Convolution", "Deconvolution"):
        rank = _CLASS_RANK[class_name]
        if "filters" not in config:
            raise MissingRequiredField(name, "num_output")
        params["num_output"] = int(config["filters"])
        params["kernel"] = _int_seq(config.get("kernel_size", 3), rank)
        params["stride"] = _int_seq(config.get("strides", 1), rank)
        if config.get("use_bias") is not None:
            params["bias"] = bool(config["use_bias"])
        dilation = _int_seq(config.get("dilation_rate", 1), rank)
        if any(d != 1 for d in dilation):
            warnings.append(f"layer {name!r}: dilation_rate ignored")
        act = config.get("activation", "linear")
        if act and act != "linear":
            warnings.append(f"layer {name!r}: fused activation {act!r} ignored")
        mode = mode_of(config)
        if mode == SAME:
            pending_same = True
        else:
            params["pad"] = [0] * rank

    elif ir_type == "Pooling":
        kind, rank = _POOL_CLASS_KIND[class_name]
        params["pool"] = kind
        kernel = _int_seq(config.get("pool_size", 2), rank)
        params["kernel"] = kernel
        strides = config.get("strides")
        params["stride"] = kernel if strides is None else _int_seq(strides, rank)
        mode = mode_of(config)
        if mode == SAME:
            pending_same = True
        else:
            params["pad"] = [0] * rank

    elif ir_type == "InnerProduct":
        if "units" not in config:
            raise MissingRequiredField(name, "num_output")
        params["num_output"] = int(config["units"])
        if config.get("use_bias") is not None:
            params["bias"] = bool(config["use_bias"])
        act = config.get("activation", "linear")
        if act and act != "linear":
            warnings.append(f"layer {name!r}: fused activation {act!r} ignored")

    elif ir_type == "ReLU":
        if config.get("negative_slope"):
            params["negative_slope"] = float(config["negative_slope"])

    elif ir_type == "Dropout":
        if config.get("rate") is not None:
            params["ratio"] = float(config["rate"])

    elif ir_type == "BatchNorm":
        if config.get("epsilon") is not None:
            params["eps"] = float(config["epsilon"])

    elif ir_type == "Concat":
        axis = config.get("axis", -1)
        if axis in (-1,):
            params["axis"] = 1
        else:
            pending_axis = int(axis)

    elif ir_type == "Eltwise":
        params["operation"] = KERAS_TO_ELTWISE[class_name]

    elif ir_type == "Reshape":
        target = config.get("target_shape")
        if target is None:
            raise MissingRequiredField(name, "dim")
        params["dim"] = _to_channel_first([int(d) for d in target])

    elif ir_type == "Embedding":
        if "input_dim" not in config or "output_dim" not in config:
            raise MissingRequiredField(name, "vocab")
        params["vocab"] = int(config["input_dim"])
        params["dim"] = int(config["output_dim"])

    elif ir_type in ("RNN", "LSTM", "GRU"):
        if "units" not in config:
            raise MissingRequiredField(name, "num_output")
        params["num_output"] = int(config["units"])
        if config.get("return_sequences"):
            params["return_sequences"] = True

    elif ir_type == "LRN":
        for key in ("local_size", "alpha", "beta"):
            if config.get(key) is not None:
                value = config[key]
                params[key] = int(value) if key == "local_size" else float(value)

    elif ir_type == "Input":
        shape = config.get("batch_input_shape") or config.get("batch_shape")
        if shape:
            dims = [int(d) for d in shape[1:] if d is not None]
            if dims:
                params["dim"] = _to_channel_first(dims)

    return ir_type, params, pending_same, pending_axis


def _parse_inbound(entry, name):
    nodes = entry.get("inbound_nodes", [])
    if not nodes:
        return []
    if len(nodes) > 1:
        raise MalformedDocument(
            f"layer {name!r} is called more than once (shared layers unsupported)")
    parents = []
    for ref in nodes[0]:
        if not isinstance(ref, (list, tuple)) or not ref or not isinstance(ref[0], str):
            raise MalformedDocument(f"layer {name!r}: unsupported inbound node format")
        parents.append(ref[0])
    return parents


def import_keras_detailed(text) -> KerasImport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("top-level JSON must be an object")
    class_name = doc.get("class_name")
    if class_name not in ("Model", "Functional", "Sequential"):
        raise MalformedDocument(f"unsupported class_name {class_name!r}")
    config = doc.get("config")
    if isinstance(config, list):  # legacy Sequential: config is the layer list
        config = {"name": "", "layers": config}
    if not isinstance(config, dict) or not isinstance(config.get("layers"), list):
        raise MalformedDocument("config.layers array is required")

    warnings = []
    sequential = class_name == "Sequential"
    entries = config["layers"]

    layers = {}  # id -> IRLayer (insertion order = file order)
    edges = []
    pending_same = set()
    pending_axis = {}
    zeropads = {}  # id -> pad list

    previous = None
    for entry in entries:
        if not isinstance(entry, dict) or "class_name" not in entry:
            raise MalformedDocument("layer entry without class_name")
        cls = entry["class_name"]
        cfg = entry.get("config") or {}
        name = _entry_name(entry)
        if name in layers or name in zeropads:
            raise MalformedDocument(f"duplicate layer name {name!r}")

        parents = [previous] if sequential and previous else _parse_inbound(entry, name)

        if sequential and previous is None and cls != "InputLayer":
            shape = cfg.get("batch_input_shape") or cfg.get("batch_shape")
            if shape:
                dims = _to_channel_first([int(d) for d in shape[1:] if d is not None])
                input_id = "input_1" if "input_1" != name else "input_0"
                layers[input_id] = new_layer(input_id, "Input", input_id, {"dim": dims})
                parents = [input_id]

        if cls in _ZEROPAD_TYPES:
            zeropads[name] = {
                "pads": _symmetric_zeropad(cfg, _CLASS_RANK[cls], name),
                "parents": parents,
            }
            previous = name
            continue

        ir_type, params, wants_same, axis = _map_layer(cls, cfg, name, warnings)
        layers[name] = new_layer(name, ir_type, name, params)
        if wants_same:
            pending_same.add(name)
        if axis is not None:
            pending_axis[name] = axis
        for p in parents:
            edges.append((p, name))
        previous = name

    # fold ZeroPadding nodes into the windowed layer they feed
    for zp_id, info in zeropads.items():
        children = [t for f, t in edges if f == zp_id]
        if len(children) != 1:
            raise MalformedDocument(
                f"ZeroPadding layer {zp_id!r} must feed exactly one layer")
        child_id = children[0]
        child = layers.get(child_id)
        if child is None or child.layer_type not in _WINDOWED:
            raise MalformedDocument(
                f"ZeroPadding layer {zp_id!r} must feed a convolution or pooling layer")
        pads = info["pads"]
        current = child.param("pad")
        current = _int_seq(current if current is not None else 0, len(pads))
        if len(current) == 1:
            current = current * len(pads)
        merged = [c + p for c, p in zip(current, pads)]
        layers[child_id] = child.with_param("pad", merged)
        edges = [(f, t) for f, t in edges if f != zp_id and t != zp_id]
        for p in info["parents"]:
            edges.append((p, child_id))

    for f, t in edges:
        if f not in layers:
            raise MalformedDocument(f"connection references unknown layer {f!r}")

    model = IRModel(config.get("name", "") or "", layers, tuple(edges))

    if pending_same or pending_axis:
        model = _resolve_pending(model, pending_same, pending_axis)

    return KerasImport(model, warnings)


def _resolve_pending(model, pending_same, pending_axis):
    """Walk in topological order computing shapes; turn "same" markers into
    numeric pads and channels_last concat axes into channel-first ones."""
    indeg = {lid: 0 for lid in model.layers}
    parents = {lid: [] for lid in model.layers}
    children = {lid: [] for lid in model.layers}
    for f, t in model.connections:
        indeg[t] += 1
        parents[t].append(f)
        children[f].append(t)
    order = [lid for lid in model.layers if indeg[lid] == 0]
    i = 0
    while i < len(order):
        node = order[i]
        i += 1
        for c in children[node]:
            indeg[c] -= 1
            if indeg[c] == 0:
                order.append(c)
    if len(order) != len(model.layers):
        raise MalformedDocument("layer graph contains a cycle")

    layers = dict(model.layers)
    shapes = {}
    for lid in order:
        layer = layers[lid]
        needs_shape = lid in pending_same or lid in pending_axis
        if needs_shape and not parents[lid]:
            raise MissingInputShape(
                f"cannot resolve layer {lid!r} without an input shape")
        inputs = []
        for p in parents[lid]:
            s = shapes.get(p)
            if s is None and needs_shape:
                raise MissingInputShape(
                    f"cannot resolve layer {lid!r} without an input shape")
            inputs.append(s)

        if lid in pending_axis:
            rank = len(inputs[0]) + 1  # +1 for the batch axis Keras counts
            axis = pending_axis[lid] % rank
            ir_axis = 1 if axis == rank - 1 else axis + 1
            layer = layer.with_param("axis", ir_axis)
            layers[lid] = layer

        if lid in pending_same:
            spatial = list(inputs[0].dims[1:])
            rank = len(spatial)
            kernel = _int_seq(layer.param("kernel"), rank)
            stride = _int_seq(layer.param("stride"), rank)
            pads = resolve_padding(SAME, spatial, kernel, stride)
            layer = layer.with_param("pad", list(pads))
            layers[lid] = layer

        if any(s is None for s in inputs):
            shapes[lid] = None  # downstream of a sink or unknown; stop tracking
        else:
            try:
                shapes[lid] = layer_output_shape(layer, inputs)
            except Exception:
                # shape tracking is best-effort here; only layers that
                # actually need a shape hard-fail above
                shapes[lid] = None

    return IRModel(model.name, layers, model.connections)


def import_keras(text) -> IRModel:
    return import_keras_detailed(text).model


# --- export ----------------------------------------------------------------

def _rank_of(layer: IRLayer):
    kernel = layer.param("kernel")
    if isinstance(kernel, (list, tuple)) and len(kernel) > 1:
        return len(kernel)
    for key in ("stride", "pad"):
        value = layer.params.get(key)
        if isinstance(value, (list, tuple)) and len(value) > 1:
            return len(value)
    if isinstance(kernel, (list, tuple)) and len(kernel) == 1:
        return 1
    return 2


def _same_equivalent(pads, spatial, kernel, stride):
    try:
        return list(resolve_padding(SAME, spatial, kernel, stride)) == list(pads)
    except Exception:
        return False


def _padding_plan(model: IRModel):
    """Per windowed layer: ("same"|"valid", extra zero-padding or None)."""
    try:
        shapes = infer_shapes(model)
    except Exception:
        shapes = {}
    parents = {lid: [] for lid in model.layers}
    for f, t in model.connections:
        parents[t].append(f)

    plan = {}
    for lid, layer in model.layers.items():
        if layer.layer_type not in _WINDOWED:
            continue
        mode = layer.param("padding_mode", CUSTOM)
        if mode in (SAME, VALID):
            plan[lid] = (mode, None)
            continue
        rank = _rank_of(layer)
        pads = _int_seq(layer.param("pad", [0]), rank)
        if len(pads) == 1:
            pads = pads * rank
        if not any(pads):
            plan[lid] = (VALID, None)
            continue
        in_shape = None
        for p in parents[lid]:
            if shapes.get(p) is not None:
                in_shape = shapes[p]
                break
        if in_shape is not None:
            spatial = list(in_shape.dims[1:])
            kernel = _int_seq(layer.param("kernel"), rank)
            stride = _int_seq(layer.param("stride"), rank)
            if len(spatial) == rank and _same_equivalent(pads, spatial, kernel, stride):
                plan[lid] = (SAME, None)
                continue
        plan[lid] = (VALID, pads)
    return plan


def _layer_entry(layer: IRLayer, parents, plan, custom_layers):
    t = layer.layer_type
    spec = layer.spec()
    if t == "LRN":
        if "LRN" not in custom_layers:
            raise UnsupportedLayer(
                layer.id, t, "keras",
                "no stock Keras equivalent; enable the custom-layer registry")
    elif t == "Python":
        raise UnsupportedLayer(
            layer.id, t, "keras", "user-defined code cannot be ported")
    elif KERAS not in spec.frameworks:
        raise UnsupportedLayer(layer.id, t, "keras")

    config = {"name": layer.id, "trainable": True}
    rank = _rank_of(layer) if t in _WINDOWED else None

    if t == "Input":
        dims = layer.params.get("dim")
        shape = [None] + _to_channel_last(dims) if dims else [None]
        config["batch_input_shape"] = shape
        config["dtype"] = "float32"
        cls = "InputLayer"

    elif t in ("Convolution", "Deconvolution"):
        cls = (_CONV_CLASS if t == "Convolution" else _DECONV_CLASS)[rank]
        config["filters"] = int(layer.param("num_output"))
        config["kernel_size"] = _int_seq(layer.param("kernel"), rank)
        config["strides"] = _int_seq(layer.param("stride"), rank)
        config["padding"] = plan[layer.id][0]
        config["use_bias"] = bool(layer.param("bias", True))
        config["activation"] = "linear"
        config["data_format"] = "channels_last"

    elif t == "Pooling":
        kind = layer.param("pool", "MAX")
        cls = (_MAXPOOL_CLASS if kind == "MAX" else _AVGPOOL_CLASS)[rank]
        config["pool_size"] = _int_seq(layer.param("kernel"), rank)
        config["strides"] = _int_seq(layer.param("stride"), rank)
        config["padding"] = plan[layer.id][0]
        config["data_format"] = "channels_last"

    elif t == "InnerProduct":
        cls = "Dense"
        config["units"] = int(layer.param("num_output"))
        config["use_bias"] = bool(layer.param("bias", True))
        config["activation"] = "linear"

    elif t == "ReLU":
        cls = "ReLU"
        slope = float(layer.param("negative_slope", 0.0))
        if slope:
            config["negative_slope"] = slope

    elif t == "Sigmoid":
        cls = "Activation"
        config["activation"] = "sigmoid"

    elif t == "Tanh":
        cls = "Activation"
        config["activation"] = "tanh"

    elif t == "Softmax":
        cls = "Softmax"
        config["axis"] = -1

    elif t == "Dropout":
        cls = "Dropout"
        config["rate"] = float(layer.param("ratio", 0.5))

    elif t == "BatchNorm":
        cls = "BatchNormalization"
        config["axis"] = -1
        config["epsilon"] = float(layer.param("eps", 1e-5))

    elif t == "Concat":
        cls = "Concatenate"
        axis = int(layer.param("axis", 1))
        config["axis"] = -1 if axis == 1 else axis - 1

    elif t == "Eltwise":
        cls = ELTWISE_TO_KERAS[layer.param("operation", "SUM")]

    elif t == "Flatten":
        cls = "Flatten"
        config["data_format"] = "channels_last"

    elif t == "Reshape":
        cls = "Reshape"
        dims = layer.param("dim")
        if dims is None:
            raise MissingRequiredField(layer.id, "dim")
        config["target_shape"] = _to_channel_last([int(d) for d in dims])

    elif t == "Embedding":
        cls = "Embedding"
        config["input_dim"] = int(layer.param("vocab"))
        config["output_dim"] = int(layer.param("dim"))

    elif t in ("RNN", "LSTM", "GRU"):
        cls = {"RNN": "SimpleRNN", "LSTM": "LSTM", "GRU": "GRU"}[t]
        config["units"] = int(layer.param("num_output"))
        config["return_sequences"] = bool(layer.param("return_sequences", False))

    elif t == "LRN":
        cls = "LRN"
        config["local_size"] = int(layer.param("local_size", 5))
        config["alpha"] = float(layer.param("alpha", 1.0))
        config["beta"] = float(layer.param("beta", 0.75))

    else:  # pragma: no cover - every catalog type is handled above
        raise UnsupportedLayer(layer.id, t, "keras")

    inbound = [] if not parents else [[[p, 0, 0, {}] for p in parents]]
    return {
        "class_name": cls,
        "name": layer.id,
        "config": config,
        "inbound_nodes": inbound,
    }


def export_keras(model: IRModel, custom_layers=frozenset()) -> str:
    plan = _padding_plan(model)
    parents = {lid: [] for lid in model.layers}
    children = {lid: [] for lid in model.layers}
    for f, t in model.connections:
        parents[t].append(f)
        children[f].append(t)

    entries = []
    for layer in model.layers.values():
        in_ids = list(parents[layer.id])
        extra = plan.get(layer.id, (None, None))[1]
        if extra:
            zp_id = f"{layer.id}_zeropad"
            rank = len(extra)
            zp_config = {
                "name": zp_id,
                "trainable": True,
                "padding": [[p, p] for p in extra] if rank > 1 else [extra[0], extra[0]],
                "data_format": "channels_last",
            }
            entries.append({
                "class_name": _ZEROPAD_CLASS[rank],
                "name": zp_id,
                "config": zp_config,
                "inbound_nodes": [] if not in_ids else [[[p, 0, 0, {}] for p in in_ids]],
            })
            in_ids = [zp_id]
        entries.append(_layer_entry(layer, in_ids, plan, custom_layers))

    roots = [lid for lid in model.layers if not parents[lid]]
    leaves = [lid for lid in model.layers if not children[lid]]
    doc = {
        "class_name": "Model",
        "config": {
            "name": model.name or "model",
            "layers": entries,
            "input_layers": [[lid, 0, 0] for lid in roots],
            "output_layers": [[lid, 0, 0] for lid in leaves],
        },
        "keras_version": "2.3.1",
        "backend": "tensorflow",
    }
    return json.dumps(doc, indent=2, sort_keys=True)
