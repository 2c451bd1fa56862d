"""Shared exception types for the model engine."""

from __future__ import annotations


class NetforgeError(Exception):
    """Base class for all domain errors."""


class UnknownLayerType(NetforgeError):
    def __init__(self, name):
        super().__init__(f"unknown layer type: {name!r}")
        self.name = name


class NotFound(NetforgeError):
    """A referenced layer, connection, model, or resource does not exist."""


class SchemaViolation(NetforgeError):
    """A parameter key, value type, or range violates the layer schema."""


class DuplicateConnection(NetforgeError):
    def __init__(self, from_id, to_id):
        super().__init__(f"connection {from_id!r} -> {to_id!r} already exists")
        self.from_id = from_id
        self.to_id = to_id


class ShapeConflict(NetforgeError):
    """Incompatible or non-positive tensor dimensions."""


class CyclicGraph(NetforgeError):
    """The operation requires an acyclic graph."""


class MissingInputShape(NetforgeError):
    """A source layer has no input shape and none was supplied."""


class MissingShape(NetforgeError):
    """Input-channel information is unavailable for a learnable layer."""


class AsymmetricPadding(NetforgeError):
    """Implicit padding resolves to an odd total; only symmetric numeric
    padding is representable."""

    def __init__(self, dim_index, total):
        super().__init__(
            f"same-padding needs {total} total pixels on dim {dim_index}; "
            "odd totals cannot be split symmetrically"
        )
        self.dim_index = dim_index
        self.total = total


class UnsupportedLayer(NetforgeError):
    """A layer type cannot be expressed in the target framework."""

    def __init__(self, layer_id, layer_type, target, detail=""):
        msg = f"UnsupportedLayer: {layer_type} (layer {layer_id!r}) cannot be exported to {target}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.layer_id = layer_id
        self.layer_type = layer_type
        self.target = target


class MalformedDocument(NetforgeError):
    """Input document is structurally invalid for its declared format."""


class MissingRequiredField(NetforgeError):
    def __init__(self, layer_id, field):
        super().__init__(f"layer {layer_id!r} is missing required field {field!r}")
        self.layer_id = layer_id
        self.field = field


class VersionOutOfRange(NetforgeError):
    def __init__(self, requested, current):
        super().__init__(f"version {requested} out of range (current version {current})")
        self.requested = requested
        self.current = current


class ExportError(NetforgeError):
    """Export failed for a reason other than layer availability."""


class ConversionError(NetforgeError):
    """Wraps an importer or exporter failure with the phase it occurred in."""

    def __init__(self, phase, cause):
        super().__init__(f"{phase} failed: {cause}")
        self.phase = phase
        self.cause = cause
