"""Shape propagation over the model graph.

Shapes are channel-first and exclude the batch axis: an RGB image is
(3, 224, 224), a feature vector is (4096,). Propagation walks the graph in
topological order so every layer sees its parents' output shapes first.
"""

from __future__ import annotations

from netforge.errors import (
    CyclicGraph,
    MissingInputShape,
    MissingRequiredField,
    ShapeConflict,
)
from netforge.ir.model import IRLayer, IRModel, TensorShape, back_edges

# Layers whose output shape equals their input shape.
_PASSTHROUGH = {
    "ReLU", "Sigmoid", "Tanh", "Softmax", "LRN", "Dropout",
    "BatchNorm", "Scale", "Eltwise",
}

# Terminal layers: consume an input, produce no tensor downstream.
_SINKS = {"SoftmaxWithLoss", "Accuracy"}


def _dims_param(layer: IRLayer, key, spatial_rank):
    """Per-dim integer list for kernel/stride/pad, broadcast to rank."""
    value = layer.param(key)
    if value is None:
        raise MissingRequiredField(layer.id, key)
    if isinstance(value, (int, float)):
        value = [int(value)]
    value = [int(v) for v in value]
    if len(value) == 1:
        value = value * spatial_rank
    if len(value) != spatial_rank:
        raise ShapeConflict(
            f"layer {layer.id!r}: {key} has {len(value)} entries "
            f"for {spatial_rank} spatial dims")
    return value


def conv_output_dim(in_dim, kernel, stride, pad):
    """floor((in + 2*pad - kernel) / stride) + 1"""
    out = (in_dim + 2 * pad - kernel) // stride + 1
    return out


def _windowed(layer: IRLayer, shape: TensorShape, num_output=None):
    """Shared conv/pool spatial arithmetic."""
    spatial = list(shape.dims[1:])
    if not spatial:
        raise ShapeConflict(
            f"layer {layer.id!r} needs spatial dims, got shape {shape.dims}")
    rank = len(spatial)
    kernel = _dims_param(layer, "kernel", rank)
    stride = _dims_param(layer, "stride", rank)
    pad = _dims_param(layer, "pad", rank)
    out_spatial = []
    for i, (d, k, s, p) in enumerate(zip(spatial, kernel, stride, pad)):
        out = conv_output_dim(d, k, s, p)
        if out < 1:
            raise ShapeConflict(
                f"layer {layer.id!r}: dim {i} collapses to {out} "
                f"(in={d}, kernel={k}, stride={s}, pad={p})")
        out_spatial.append(out)
    channels = num_output if num_output is not None else shape.dims[0]
    return TensorShape((channels, *out_spatial))


def _deconv_shape(layer: IRLayer, shape: TensorShape, num_output):
    spatial = list(shape.dims[1:])
    rank = len(spatial)
    kernel = _dims_param(layer, "kernel", rank)
    stride = _dims_param(layer, "stride", rank)
    pad = _dims_param(layer, "pad", rank)
    out_spatial = []
    for d, k, s, p in zip(spatial, kernel, stride, pad):
        out_spatial.append(s * (d - 1) + k - 2 * p)
    for i, out in enumerate(out_spatial):
        if out < 1:
            raise ShapeConflict(f"layer {layer.id!r}: dim {i} collapses to {out}")
    return TensorShape((num_output, *out_spatial))


def _require_int_param(layer: IRLayer, key):
    value = layer.param(key)
    if value is None:
        raise MissingRequiredField(layer.id, key)
    return int(value)


def _single_shape(layer: IRLayer, inputs):
    shapes = set(s.dims for s in inputs)
    if len(shapes) > 1:
        raise ShapeConflict(
            f"layer {layer.id!r} received conflicting input shapes {sorted(shapes)}")
    return inputs[0]


def layer_output_shape(layer: IRLayer, inputs):
    """Output shape of one layer from its parents' output shapes.

    `inputs` holds one TensorShape per incoming connection. Returns None for
    sinks (loss/accuracy heads have no tensor output).
    """
    t = layer.layer_type

    if t == "Input":
        dims = layer.param("dim")
        if dims is None:
            raise MissingInputShape(
                f"Input layer {layer.id!r} has no dim param and no provided shape")
        if isinstance(dims, (int, float)):
            dims = [int(dims)]
        return TensorShape(tuple(int(d) for d in dims))

    if not inputs:
        raise MissingInputShape(f"layer {layer.id!r} ({t}) has no incoming shape")

    if t in _SINKS:
        return None

    if t in _PASSTHROUGH:
        if t == "Eltwise":
            return _single_shape(layer, inputs)
        return inputs[0]

    if t == "Convolution":
        return _windowed(layer, inputs[0], _require_int_param(layer, "num_output"))
    if t == "Pooling":
        return _windowed(layer, inputs[0])
    if t == "Deconvolution":
        return _deconv_shape(layer, inputs[0], _require_int_param(layer, "num_output"))

    if t == "InnerProduct":
        return TensorShape((_require_int_param(layer, "num_output"),))

    if t == "Flatten":
        return TensorShape((inputs[0].count(),))

    if t == "Reshape":
        dims = layer.param("dim")
        if dims is None:
            raise MissingRequiredField(layer.id, "dim")
        if isinstance(dims, (int, float)):
            dims = [int(dims)]
        dims = [int(d) for d in dims]
        inferred = []
        wildcard = None
        known = 1
        for i, d in enumerate(dims):
            if d == -1:
                if wildcard is not None:
                    raise ShapeConflict(f"layer {layer.id!r}: more than one -1 in reshape dims")
                wildcard = i
                inferred.append(0)
            else:
                inferred.append(d)
                known *= d
        total = inputs[0].count()
        if wildcard is not None:
            if known == 0 or total % known:
                raise ShapeConflict(
                    f"layer {layer.id!r}: cannot reshape {total} elements into {dims}")
            inferred[wildcard] = total // known
        elif known != total:
            raise ShapeConflict(
                f"layer {layer.id!r}: reshape to {dims} does not preserve "
                f"{total} elements")
        return TensorShape(tuple(inferred))

    if t == "Concat":
        axis = int(layer.param("axis", 1))
        # axis counts the batch dim, which shapes omit; axis 1 is dims[0]
        ax = axis - 1
        base = inputs[0]
        if ax < 0 or ax >= len(base):
            raise ShapeConflict(f"layer {layer.id!r}: concat axis {axis} out of range")
        total = 0
        for s in inputs:
            if len(s) != len(base):
                raise ShapeConflict(
                    f"layer {layer.id!r}: rank mismatch {s.dims} vs {base.dims}")
            for i in range(len(base)):
                if i != ax and s[i] != base[i]:
                    raise ShapeConflict(
                        f"layer {layer.id!r}: non-concat dims differ "
                        f"({s.dims} vs {base.dims})")
            total += s[ax]
        dims = list(base.dims)
        dims[ax] = total
        return TensorShape(tuple(dims))

    if t == "Embedding":
        dim = _require_int_param(layer, "dim")
        in_shape = inputs[0]
        return TensorShape((*in_shape.dims, dim))

    if t in ("RNN", "LSTM", "GRU"):
        hidden = _require_int_param(layer, "num_output")
        in_shape = inputs[0]
        if len(in_shape) < 2:
            raise ShapeConflict(
                f"layer {layer.id!r} ({t}) needs a (steps, features) input, "
                f"got {in_shape.dims}")
        if layer.param("return_sequences", False):
            return TensorShape((in_shape[0], hidden))
        return TensorShape((hidden,))

    if t == "Python":
        # Opaque user code: shape passes through untouched.
        return inputs[0]

    raise ShapeConflict(f"no shape rule for layer type {t!r}")


def infer_shapes(model: IRModel, input_shapes=None) -> dict:
    """Map layer id -> output TensorShape (None for sinks).

    `input_shapes` optionally maps root layer ids to their output shapes;
    Input layers can instead carry their shape in the `dim` param. Raises
    CyclicGraph when forward edges form a cycle, MissingInputShape when a
    root has neither an entry nor a dim param, ShapeConflict on
    inconsistent inputs.
    """
    given = {}
    for lid, s in (input_shapes or {}).items():
        given[lid] = s if isinstance(s, TensorShape) else TensorShape(tuple(s))
    back = back_edges(model)
    if back:
        raise CyclicGraph(f"cannot infer shapes: cyclic connections {sorted(back)}")
    indeg = {lid: 0 for lid in model.layers}
    parents = {lid: [] for lid in model.layers}
    children = {lid: [] for lid in model.layers}
    for f, t in model.connections:
        indeg[t] += 1
        parents[t].append(f)
        children[f].append(t)

    order = [lid for lid in model.layers if indeg[lid] == 0]
    i = 0
    counts = dict(indeg)
    while i < len(order):
        node = order[i]
        i += 1
        for child in children[node]:
            counts[child] -= 1
            if counts[child] == 0:
                order.append(child)
    if len(order) != len(model.layers):
        raise CyclicGraph("cannot infer shapes: connections contain a cycle")

    shapes = {}
    for lid in order:
        layer = model.layers[lid]
        if lid in given:
            shapes[lid] = given[lid]
            continue
        inputs = []
        for p in parents[lid]:
            s = shapes.get(p)
            if s is None:
                raise MissingInputShape(
                    f"layer {lid!r} consumes {p!r} which produces no tensor")
            inputs.append(s)
        shapes[lid] = layer_output_shape(layer, inputs)
    return shapes
