"""Structural validation producing diagnostics instead of exceptions.

The contract: an empty result means every model/layer invariant holds, no
connection dangles, and all required params are set. Checks re-derive
everything from scratch so hand-built models get the same scrutiny as
parsed ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from netforge.errors import SchemaViolation, UnknownLayerType
from netforge.ir.catalog import catalog_lookup
from netforge.ir.model import IRModel, _check_param

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    layer_id: str  # "" when the problem is not tied to one layer
    message: str

    def __str__(self):
        where = f" [{self.layer_id}]" if self.layer_id else ""
        return f"{self.severity}{where}: {self.message}"


def validate(model: IRModel) -> list:
    """All invariant violations, as a stable-ordered Diagnostic list."""
    out = []

    for lid, layer in model.layers.items():
        if lid != layer.id:
            out.append(Diagnostic(ERROR, lid, f"layer keyed {lid!r} carries id {layer.id!r}"))
        try:
            spec = catalog_lookup(layer.layer_type)
        except UnknownLayerType as exc:
            out.append(Diagnostic(ERROR, lid, str(exc)))
            continue
        for key, value in layer.params.items():
            try:
                _check_param(layer.layer_type, key, value)
            except SchemaViolation as exc:
                out.append(Diagnostic(ERROR, lid, str(exc)))
        for schema in spec.params:
            if schema.required and layer.params.get(schema.key) is None:
                out.append(Diagnostic(
                    ERROR, lid, f"required parameter {schema.key!r} is not set"))

    seen = set()
    for f, t in model.connections:
        if f not in model.layers:
            out.append(Diagnostic(ERROR, f, f"connection from missing layer {f!r}"))
            continue
        if t not in model.layers:
            out.append(Diagnostic(ERROR, t, f"connection to missing layer {t!r}"))
            continue
        if (f, t) in seen:
            out.append(Diagnostic(ERROR, t, f"duplicate connection {f!r} -> {t!r}"))
        seen.add((f, t))
        if not model.layers[f].spec().src_endpoints:
            out.append(Diagnostic(
                ERROR, f,
                f"{model.layers[f].layer_type} layer {f!r} has no source endpoint"))
        if not model.layers[t].spec().trg_endpoints:
            out.append(Diagnostic(
                ERROR, t,
                f"{model.layers[t].layer_type} layer {t!r} accepts no incoming connection"))

    return out
