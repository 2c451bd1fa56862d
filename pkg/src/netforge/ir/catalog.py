"""Layer catalog: one immutable spec per layer type.

Each spec carries the parameter schemas (key, widget kind, default, range),
endpoint labels governing connection arity, presentation metadata (color,
short name, display properties), the dashboard category, framework
availability, and the learnable flag used by parameter counting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from netforge.errors import UnknownLayerType

CAFFE = "caffe"
KERAS = "keras"
FRAMEWORKS = (CAFFE, KERAS)

CATEGORIES = (
    "Data",
    "Vision",
    "Recurrent",
    "Activation/Neuron",
    "Normalization",
    "Common",
    "Loss",
    "Utility",
)

# Widget kinds for the parameter pane.
KIND_NUMBER = "number"
KIND_TEXT = "text"
KIND_CHECKBOX = "checkbox"
KIND_SELECT = "select"


@dataclass(frozen=True)
class ParamSchema:
    key: str
    display_name: str
    default: object
    kind: str
    required: bool = False
    frameworks: frozenset = frozenset(FRAMEWORKS)
    per_dim: bool = False  # value may be an integer list of length 1..3
    min_value: Optional[float] = None
    max_value: Optional[float] = None
    choices: tuple = ()

    def __post_init__(self):
        if self.kind not in (KIND_NUMBER, KIND_TEXT, KIND_CHECKBOX, KIND_SELECT):
            raise ValueError(f"bad param kind {self.kind!r}")
        if self.kind == KIND_CHECKBOX and not isinstance(self.default, bool):
            raise ValueError(f"checkbox default for {self.key!r} must be boolean")
        if self.kind == KIND_NUMBER and self.default is not None:
            values = self.default if isinstance(self.default, (list, tuple)) else [self.default]
            for v in values:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ValueError(f"number default for {self.key!r} must be numeric")
                if v != v or v in (float("inf"), float("-inf")):
                    raise ValueError(f"number default for {self.key!r} must be finite")
        if self.kind == KIND_SELECT and self.choices and self.default not in self.choices:
            raise ValueError(f"select default for {self.key!r} outside choices")


@dataclass(frozen=True)
class LayerSpec:
    layer_type: str
    category: str
    params: tuple  # ordered ParamSchema
    src_endpoints: tuple = ("Bottom",)
    trg_endpoints: tuple = ("Top",)
    learnable: bool = False
    frameworks: frozenset = frozenset(FRAMEWORKS)
    color: str = "#2196f3"
    abbrev: str = ""
    props: tuple = ()  # display-only properties, e.g. the editable name

    def param(self, key) -> Optional[ParamSchema]:
        for schema in self.params:
            if schema.key == key:
                return schema
        return None

    def param_keys(self):
        return [schema.key for schema in self.params]

    def defaults(self) -> dict:
        out = {}
        for schema in self.params:
            if schema.default is not None:
                out[schema.key] = list(schema.default) if isinstance(schema.default, (list, tuple)) else schema.default
        return out


def _num(key, name, default, required=False, minimum=None, maximum=None, frameworks=FRAMEWORKS):
    return ParamSchema(key, name, default, KIND_NUMBER, required=required,
                       min_value=minimum, max_value=maximum, frameworks=frozenset(frameworks))


def _dims(key, name, default, required=False, minimum=None, frameworks=FRAMEWORKS):
    return ParamSchema(key, name, default, KIND_NUMBER, required=required, per_dim=True,
                       min_value=minimum, frameworks=frozenset(frameworks))


def _flag(key, name, default, frameworks=FRAMEWORKS):
    return ParamSchema(key, name, default, KIND_CHECKBOX, frameworks=frozenset(frameworks))


def _sel(key, name, default, choices, frameworks=FRAMEWORKS):
    return ParamSchema(key, name, default, KIND_SELECT, choices=tuple(choices),
                       frameworks=frozenset(frameworks))


def _text(key, name, default="", required=False, frameworks=FRAMEWORKS):
    return ParamSchema(key, name, default, KIND_TEXT, required=required,
                       frameworks=frozenset(frameworks))


_NAME_PROP = (ParamSchema("name", "Name", "", KIND_TEXT),)

_BOTH = frozenset(FRAMEWORKS)
_CAFFE_ONLY = frozenset({CAFFE})
_KERAS_ONLY = frozenset({KERAS})

_PAD_MODES = ("custom", "same", "valid")


def _conv_params():
    return (
        _num("num_output", "Number of outputs", None, required=True, minimum=1),
        _dims("kernel", "Kernel size", (3, 3), minimum=1),
        _dims("stride", "Stride", (1, 1), minimum=1),
        _dims("pad", "Padding", (0, 0), minimum=0),
        _flag("bias", "Use bias", True),
        _sel("padding_mode", "Padding mode", "custom", _PAD_MODES),
    )


_CATALOG = {
    "Input": LayerSpec(
        "Input", "Data",
        params=(_dims("dim", "Dimensions", None),),
        src_endpoints=("Bottom",), trg_endpoints=(),
        color="#607d8b", abbrev="data", props=_NAME_PROP,
    ),
    "Convolution": LayerSpec(
        "Convolution", "Vision", params=_conv_params(),
        learnable=True, color="#3f51b5", abbrev="conv", props=_NAME_PROP,
    ),
    "Deconvolution": LayerSpec(
        "Deconvolution", "Vision", params=_conv_params(),
        learnable=True, color="#5c6bc0", abbrev="deconv", props=_NAME_PROP,
    ),
    "Pooling": LayerSpec(
        "Pooling", "Vision",
        params=(
            _sel("pool", "Pool method", "MAX", ("MAX", "AVE")),
            _dims("kernel", "Kernel size", (2, 2), minimum=1),
            _dims("stride", "Stride", (2, 2), minimum=1),
            _dims("pad", "Padding", (0, 0), minimum=0),
            _sel("padding_mode", "Padding mode", "custom", _PAD_MODES),
        ),
        color="#7986cb", abbrev="pool", props=_NAME_PROP,
    ),
    "InnerProduct": LayerSpec(
        "InnerProduct", "Common",
        params=(
            _num("num_output", "Number of outputs", None, required=True, minimum=1),
            _flag("bias", "Use bias", True),
        ),
        learnable=True, color="#2196f3", abbrev="fc", props=_NAME_PROP,
    ),
    "ReLU": LayerSpec(
        "ReLU", "Activation/Neuron",
        params=(_num("negative_slope", "Negative slope", 0.0),),
        color="#4caf50", abbrev="relu", props=_NAME_PROP,
    ),
    "Sigmoid": LayerSpec(
        "Sigmoid", "Activation/Neuron", params=(),
        color="#66bb6a", abbrev="sigmoid", props=_NAME_PROP,
    ),
    "Tanh": LayerSpec(
        "Tanh", "Activation/Neuron", params=(),
        color="#81c784", abbrev="tanh", props=_NAME_PROP,
    ),
    "Softmax": LayerSpec(
        "Softmax", "Activation/Neuron",
        params=(_num("axis", "Axis", 1, frameworks=_CAFFE_ONLY),),
        color="#8bc34a", abbrev="softmax", props=_NAME_PROP,
    ),
    "SoftmaxWithLoss": LayerSpec(
        "SoftmaxWithLoss", "Loss", params=(),
        src_endpoints=(), trg_endpoints=("Top",),
        frameworks=_CAFFE_ONLY, color="#e91e63", abbrev="loss", props=_NAME_PROP,
    ),
    "Accuracy": LayerSpec(
        "Accuracy", "Loss",
        params=(
            _num("top_k", "Top-K", 1, frameworks=_CAFFE_ONLY),
            _num("axis", "Axis", 1, frameworks=_CAFFE_ONLY),
        ),
        src_endpoints=(), trg_endpoints=("Top",),
        frameworks=_CAFFE_ONLY, color="#f44336", abbrev="acc", props=_NAME_PROP,
    ),
    "LRN": LayerSpec(
        "LRN", "Normalization",
        params=(
            _num("local_size", "Local size", 5, minimum=1),
            _num("alpha", "Alpha", 1.0),
            _num("beta", "Beta", 0.75),
        ),
        frameworks=_CAFFE_ONLY, color="#ff9800", abbrev="lrn", props=_NAME_PROP,
    ),
    "Dropout": LayerSpec(
        "Dropout", "Common",
        params=(_num("ratio", "Dropout ratio", 0.5, minimum=0.0, maximum=1.0),),
        color="#42a5f5", abbrev="drop", props=_NAME_PROP,
    ),
    "BatchNorm": LayerSpec(
        "BatchNorm", "Normalization",
        params=(_num("eps", "Epsilon", 1e-5, minimum=0.0),),
        learnable=True, color="#ffb74d", abbrev="bn", props=_NAME_PROP,
    ),
    "Scale": LayerSpec(
        "Scale", "Normalization",
        params=(_flag("bias", "Use bias", True),),
        frameworks=_CAFFE_ONLY, color="#ffa726", abbrev="scale", props=_NAME_PROP,
    ),
    "Concat": LayerSpec(
        "Concat", "Utility",
        params=(_num("axis", "Axis", 1),),
        color="#009688", abbrev="concat", props=_NAME_PROP,
    ),
    "Eltwise": LayerSpec(
        "Eltwise", "Utility",
        params=(_sel("operation", "Operation", "SUM", ("SUM", "PROD", "MAX")),),
        color="#26a69a", abbrev="eltwise", props=_NAME_PROP,
    ),
    "Flatten": LayerSpec(
        "Flatten", "Utility", params=(),
        color="#4db6ac", abbrev="flatten", props=_NAME_PROP,
    ),
    "Reshape": LayerSpec(
        "Reshape", "Utility",
        params=(_dims("dim", "Dimensions", None, required=True),),
        color="#80cbc4", abbrev="reshape", props=_NAME_PROP,
    ),
    "Embedding": LayerSpec(
        "Embedding", "Common",
        params=(
            _num("vocab", "Vocabulary size", None, required=True, minimum=1),
            _num("dim", "Embedding size", None, required=True, minimum=1),
        ),
        learnable=True, frameworks=_KERAS_ONLY,
        color="#1e88e5", abbrev="embed", props=_NAME_PROP,
    ),
    "RNN": LayerSpec(
        "RNN", "Recurrent",
        params=(
            _num("num_output", "Number of outputs", None, required=True, minimum=1),
            _flag("return_sequences", "Return sequences", False, frameworks=_KERAS_ONLY),
        ),
        learnable=True, color="#9c27b0", abbrev="rnn", props=_NAME_PROP,
    ),
    "LSTM": LayerSpec(
        "LSTM", "Recurrent",
        params=(
            _num("num_output", "Number of outputs", None, required=True, minimum=1),
            _flag("return_sequences", "Return sequences", False, frameworks=_KERAS_ONLY),
        ),
        learnable=True, color="#ab47bc", abbrev="lstm", props=_NAME_PROP,
    ),
    "GRU": LayerSpec(
        "GRU", "Recurrent",
        params=(
            _num("num_output", "Number of outputs", None, required=True, minimum=1),
            _flag("return_sequences", "Return sequences", False, frameworks=_KERAS_ONLY),
        ),
        learnable=True, frameworks=_KERAS_ONLY,
        color="#ba68c8", abbrev="gru", props=_NAME_PROP,
    ),
    "Python": LayerSpec(
        "Python", "Utility",
        params=(
            _text("module", "Module"),
            _text("layer", "Layer"),
        ),
        frameworks=_CAFFE_ONLY, color="#9e9e9e", abbrev="py", props=_NAME_PROP,
    ),
}

LAYER_TYPES = tuple(_CATALOG)


def catalog_lookup(layer_type: str) -> LayerSpec:
    """Return the immutable catalog spec for a layer type."""
    try:
        return _CATALOG[layer_type]
    except KeyError:
        raise UnknownLayerType(layer_type) from None


def catalog_types():
    return LAYER_TYPES


def is_available(layer_type: str, framework: str) -> bool:
    return framework in catalog_lookup(layer_type).frameworks
