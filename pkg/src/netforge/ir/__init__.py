"""Framework-neutral model representation: catalog, graph, shapes, counts."""

from netforge.ir.catalog import (
    CAFFE,
    KERAS,
    CATEGORIES,
    LayerSpec,
    ParamSchema,
    catalog_lookup,
    catalog_types,
    is_available,
)
from netforge.ir.model import (
    FORMAT_VERSION,
    POSITION_KEY,
    IRLayer,
    IRModel,
    TensorShape,
    add_layer,
    back_edges,
    connect,
    deepest_layer,
    delete_layer,
    depth_map,
    disconnect,
    model_from_doc,
    model_from_json,
    model_to_doc,
    model_to_json,
    new_layer,
    update_param,
)
from netforge.ir.params import ParamCount, count_parameters, layer_param_count, parameter_table
from netforge.ir.shapes import conv_output_dim, infer_shapes, layer_output_shape
from netforge.ir.validate import ERROR, WARNING, Diagnostic, validate

__all__ = [
    "CAFFE", "KERAS", "CATEGORIES", "LayerSpec", "ParamSchema",
    "catalog_lookup", "catalog_types", "is_available",
    "FORMAT_VERSION", "POSITION_KEY", "IRLayer", "IRModel", "TensorShape",
    "add_layer", "back_edges", "connect", "deepest_layer", "delete_layer",
    "depth_map", "disconnect", "model_from_doc", "model_from_json",
    "model_to_doc", "model_to_json", "new_layer", "update_param",
    "ParamCount", "count_parameters", "layer_param_count", "parameter_table",
    "conv_output_dim", "infer_shapes", "layer_output_shape",
    "ERROR", "WARNING", "Diagnostic", "validate",
]
