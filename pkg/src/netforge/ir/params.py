"""Learnable parameter counts.

Counts depend on input shapes (a Dense layer's weight matrix is in x out),
so counting runs shape inference first. Layers outside the learnable set
contribute zero.
"""

from __future__ import annotations

from dataclasses import dataclass

from netforge.errors import MissingRequiredField, MissingShape
from netforge.ir.model import IRLayer, IRModel
from netforge.ir.shapes import infer_shapes


@dataclass(frozen=True)
class ParamCount:
    per_layer: dict  # layer id -> int
    total: int


def _prod(values):
    n = 1
    for v in values:
        n *= v
    return n


def _kernel_volume(layer: IRLayer, spatial_rank):
    value = layer.param("kernel")
    if value is None:
        raise MissingRequiredField(layer.id, "kernel")
    if isinstance(value, (int, float)):
        value = [int(value)]
    value = [int(v) for v in value]
    if len(value) == 1:
        value = value * spatial_rank
    return _prod(value)


def layer_param_count(layer: IRLayer, input_shape) -> int:
    """Learnables for one layer given the shape feeding it.

    `input_shape` may be None only for layers that do not need it
    (Embedding reads vocab and dim from its own params).
    """
    t = layer.layer_type

    if t == "Embedding":
        return int(layer.param("vocab")) * int(layer.param("dim"))

    if not layer.spec().learnable:
        return 0

    if input_shape is None:
        raise MissingShape(
            f"cannot count parameters of {t} layer {layer.id!r}: input shape unknown")

    if t in ("Convolution", "Deconvolution"):
        out = int(layer.param("num_output"))
        in_channels = input_shape[0]
        rank = max(len(input_shape) - 1, 1)
        weights = out * in_channels * _kernel_volume(layer, rank)
        bias = out if layer.param("bias", True) else 0
        return weights + bias

    if t == "InnerProduct":
        out = int(layer.param("num_output"))
        fan_in = _prod(input_shape.dims)
        bias = out if layer.param("bias", True) else 0
        return fan_in * out + bias

    if t == "BatchNorm":
        # trainable scale and shift per channel; running stats excluded
        return 2 * input_shape[0]

    if t in ("RNN", "LSTM", "GRU"):
        hidden = int(layer.param("num_output"))
        features = input_shape[-1]
        gates = {"RNN": 1, "LSTM": 4, "GRU": 3}[t]
        return gates * hidden * (features + hidden + 1)

    return 0


def parameter_table(model: IRModel, shapes=None) -> ParamCount:
    """Per-layer counts plus the total."""
    if shapes is None:
        shapes = infer_shapes(model)
    parents = {lid: [] for lid in model.layers}
    for f, t in model.connections:
        parents[t].append(f)
    per_layer = {}
    total = 0
    for lid, layer in model.layers.items():
        if not layer.spec().learnable:
            per_layer[lid] = 0
            continue
        input_shape = None
        for p in parents[lid]:
            if shapes.get(p) is not None:
                input_shape = shapes[p]
                break
        count = layer_param_count(layer, input_shape)
        per_layer[lid] = count
        total += count
    return ParamCount(per_layer, total)


def count_parameters(model: IRModel, shapes=None) -> int:
    """Total trainable parameters across the model."""
    return parameter_table(model, shapes).total
