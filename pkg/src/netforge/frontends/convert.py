"""The conversion hub.

Every conversion factors through the neutral representation: parse with the
source framework's importer, emit with the target's exporter. Adding a
framework therefore costs one importer and one exporter, not a translator
per pair. Errors carry the phase they occurred in so callers can tell a bad
input file from an inexpressible model.
"""

from __future__ import annotations

from netforge.errors import ConversionError, NetforgeError
from netforge.frontends.caffe import export_caffe, import_caffe
from netforge.frontends.keras import export_keras, import_keras
from netforge.ir.catalog import CAFFE, KERAS
from netforge.ir.model import IRModel

IMPORTERS = {CAFFE: import_caffe, KERAS: import_keras}


def _exporter(framework, custom_layers):
    if framework == CAFFE:
        return export_caffe
    return lambda model: export_keras(model, custom_layers=custom_layers)


def import_model(text, source) -> IRModel:
    if source not in IMPORTERS:
        raise ConversionError("import", ValueError(f"unknown framework {source!r}"))
    try:
        return IMPORTERS[source](text)
    except NetforgeError as exc:
        raise ConversionError("import", exc) from exc


def export_model(model: IRModel, target, custom_layers=frozenset()) -> str:
    if target not in IMPORTERS:
        raise ConversionError("export", ValueError(f"unknown framework {target!r}"))
    try:
        return _exporter(target, custom_layers)(model)
    except NetforgeError as exc:
        raise ConversionError("export", exc) from exc


def convert(model_text, source, target, custom_layers=frozenset()) -> str:
    """Source-framework text to target-framework text, via the IR."""
    model = import_model(model_text, source)
    return export_model(model, target, custom_layers=custom_layers)


# --- canonical comparison ---------------------------------------------------
# Exporters omit schema defaults and importers store only what the file
# said, so round-trip equality is defined over effective values of the
# params available in the framework, not raw explicit dicts.

_WINDOWED = {"Convolution", "Deconvolution", "Pooling"}


def canonical_params(layer, framework) -> dict:
    """Effective values of every schema param available in `framework`,
    normalized for comparison. padding_mode is excluded: importers always
    store numeric padding, so the mode never survives a round trip."""
    out = {}
    spec = layer.spec()
    for schema in spec.params:
        if framework not in schema.frameworks or schema.key == "padding_mode":
            continue
        value = layer.param(schema.key)
        if isinstance(value, tuple):
            value = list(value)
        if isinstance(value, list):
            value = [int(v) for v in value]
            # Caffe's single-value kernel/stride/pad fields mean "all
            # spatial dims" and these layers are 2-D there
            if framework == CAFFE and layer.layer_type in _WINDOWED and len(value) == 1:
                value = value * 2
        elif isinstance(value, float) and value == int(value):
            value = int(value)
        out[schema.key] = value
    return out


def isomorphic(a: IRModel, b: IRModel, framework) -> bool:
    """Graph isomorphism under preserved ids: same layer ids and types, same
    connection set, canonically equal params."""
    if set(a.layers) != set(b.layers):
        return False
    if set(a.connections) != set(b.connections):
        return False
    for lid, la in a.layers.items():
        lb = b.layers[lid]
        if la.layer_type != lb.layer_type:
            return False
        if canonical_params(la, framework) != canonical_params(lb, framework):
            return False
    return True
