"""Per-framework identifier tables.

Each framework gets one bidirectional table mapping its layer class names to
catalog types, plus param-key tables. The tables must stay bijective over
the catalog subset available in that framework; the converter never guesses
names outside them.
"""

from __future__ import annotations

from netforge.errors import UnknownLayerType
from netforge.ir.catalog import CAFFE, KERAS, catalog_lookup, catalog_types

# --- Caffe ----------------------------------------------------------------

# IR type -> prototxt `type:` string. Mostly identity; TanH is cased
# differently in prototxt files.
CAFFE_TYPE_OF = {
    "Input": "Input",
    "Convolution": "Convolution",
    "Deconvolution": "Deconvolution",
    "Pooling": "Pooling",
    "InnerProduct": "InnerProduct",
    "ReLU": "ReLU",
    "Sigmoid": "Sigmoid",
    "Tanh": "TanH",
    "Softmax": "Softmax",
    "SoftmaxWithLoss": "SoftmaxWithLoss",
    "Accuracy": "Accuracy",
    "LRN": "LRN",
    "Dropout": "Dropout",
    "BatchNorm": "BatchNorm",
    "Scale": "Scale",
    "Concat": "Concat",
    "Eltwise": "Eltwise",
    "Flatten": "Flatten",
    "Reshape": "Reshape",
    "RNN": "RNN",
    "LSTM": "LSTM",
    "Python": "Python",
}

IR_TYPE_OF_CAFFE = {v: k for k, v in CAFFE_TYPE_OF.items()}

# IR type -> (param block field name, {ir param key -> prototxt field name})
CAFFE_PARAM_BLOCK = {
    "Input": ("input_param", {}),  # shape handled structurally
    "Convolution": ("convolution_param", {
        "num_output": "num_output", "kernel": "kernel_size",
        "stride": "stride", "pad": "pad", "bias": "bias_term",
    }),
    "Deconvolution": ("convolution_param", {
        "num_output": "num_output", "kernel": "kernel_size",
        "stride": "stride", "pad": "pad", "bias": "bias_term",
    }),
    "Pooling": ("pooling_param", {
        "pool": "pool", "kernel": "kernel_size", "stride": "stride", "pad": "pad",
    }),
    "InnerProduct": ("inner_product_param", {
        "num_output": "num_output", "bias": "bias_term",
    }),
    "ReLU": ("relu_param", {"negative_slope": "negative_slope"}),
    "Softmax": ("softmax_param", {"axis": "axis"}),
    "Accuracy": ("accuracy_param", {"top_k": "top_k", "axis": "axis"}),
    "LRN": ("lrn_param", {
        "local_size": "local_size", "alpha": "alpha", "beta": "beta",
    }),
    "Dropout": ("dropout_param", {"ratio": "dropout_ratio"}),
    "BatchNorm": ("batch_norm_param", {"eps": "eps"}),
    "Scale": ("scale_param", {"bias": "bias_term"}),
    "Concat": ("concat_param", {"axis": "axis"}),
    "Eltwise": ("eltwise_param", {"operation": "operation"}),
    "Reshape": ("reshape_param", {}),  # shape handled structurally
    "RNN": ("recurrent_param", {"num_output": "num_output"}),
    "LSTM": ("recurrent_param", {"num_output": "num_output"}),
    "Python": ("python_param", {"module": "module", "layer": "layer"}),
}

# --- Keras ----------------------------------------------------------------

# IR type -> canonical Keras class name (2-D picked for dimensioned layers;
# the exporter swaps in the 1D/3D variant from the kernel rank).
KERAS_CLASS_OF = {
    "Input": "InputLayer",
    "Convolution": "Conv2D",
    "Deconvolution": "Conv2DTranspose",
    "Pooling": "MaxPooling2D",  # AveragePooling2D when pool == AVE
    "InnerProduct": "Dense",
    "ReLU": "ReLU",
    "Sigmoid": "Activation",  # activation: sigmoid
    "Tanh": "Activation",  # activation: tanh
    "Softmax": "Softmax",
    "Dropout": "Dropout",
    "BatchNorm": "BatchNormalization",
    "Concat": "Concatenate",
    "Eltwise": "Add",  # Multiply / Maximum by operation param
    "Flatten": "Flatten",
    "Reshape": "Reshape",
    "Embedding": "Embedding",
    "RNN": "SimpleRNN",
    "LSTM": "LSTM",
    "GRU": "GRU",
    "LRN": "LRN",  # custom class, export gated by the registry
}

# Keras class name -> IR type, covering dimensionality variants and the
# merge-layer family. Activation resolves via its config.
IR_TYPE_OF_KERAS = {
    "InputLayer": "Input",
    "Conv1D": "Convolution", "Conv2D": "Convolution", "Conv3D": "Convolution",
    "Conv1DTranspose": "Deconvolution", "Conv2DTranspose": "Deconvolution",
    "Conv3DTranspose": "Deconvolution",
    "MaxPooling1D": "Pooling", "MaxPooling2D": "Pooling", "MaxPooling3D": "Pooling",
    "AveragePooling1D": "Pooling", "AveragePooling2D": "Pooling",
    "AveragePooling3D": "Pooling",
    "Dense": "InnerProduct",
    "ReLU": "ReLU",
    "Softmax": "Softmax",
    "Dropout": "Dropout",
    "BatchNormalization": "BatchNorm",
    "Concatenate": "Concat",
    "Add": "Eltwise", "Multiply": "Eltwise", "Maximum": "Eltwise",
    "Flatten": "Flatten",
    "Reshape": "Reshape",
    "Embedding": "Embedding",
    "SimpleRNN": "RNN",
    "LSTM": "LSTM",
    "GRU": "GRU",
    "LRN": "LRN",
}

ACTIVATION_TO_IR = {
    "relu": "ReLU",
    "sigmoid": "Sigmoid",
    "tanh": "Tanh",
    "softmax": "Softmax",
    "linear": None,  # identity; only valid inside another layer's config
}

ELTWISE_TO_KERAS = {"SUM": "Add", "PROD": "Multiply", "MAX": "Maximum"}
KERAS_TO_ELTWISE = {v: k for k, v in ELTWISE_TO_KERAS.items()}

# ir param key -> keras config key, shared across classes where they appear
KERAS_PARAM_KEY = {
    "kernel": "kernel_size",
    "stride": "strides",
    "bias": "use_bias",
    "ratio": "rate",
    "eps": "epsilon",
    "vocab": "input_dim",
    "dim": "output_dim",  # Embedding only; Reshape uses target_shape
    "num_output": "units",  # filters for conv classes
    "return_sequences": "return_sequences",
    "negative_slope": "negative_slope",
}


def framework_type_name(ir_type, framework):
    """The framework's identifier for a catalog type; raises when the type
    is not available there."""
    spec = catalog_lookup(ir_type)
    if framework not in spec.frameworks:
        raise UnknownLayerType(f"{ir_type} is not available in {framework}")
    if framework == CAFFE:
        return CAFFE_TYPE_OF[ir_type]
    return KERAS_CLASS_OF[ir_type]


def ir_type_name(framework_name, framework):
    """IR catalog type for a framework identifier."""
    table = IR_TYPE_OF_CAFFE if framework == CAFFE else IR_TYPE_OF_KERAS
    try:
        return table[framework_name]
    except KeyError:
        raise UnknownLayerType(framework_name) from None


def check_bijective():
    """Sanity check used by tests: every catalog type available in a
    framework maps there and back uniquely."""
    problems = []
    for ir_type in catalog_types():
        spec = catalog_lookup(ir_type)
        if CAFFE in spec.frameworks:
            name = CAFFE_TYPE_OF.get(ir_type)
            if name is None:
                problems.append(f"{ir_type}: no Caffe name")
            elif IR_TYPE_OF_CAFFE.get(name) != ir_type:
                problems.append(f"{ir_type}: Caffe name {name!r} not invertible")
        if KERAS in spec.frameworks:
            name = KERAS_CLASS_OF.get(ir_type)
            if name is None:
                problems.append(f"{ir_type}: no Keras class")
            elif name != "Activation" and IR_TYPE_OF_KERAS.get(name) is None:
                problems.append(f"{ir_type}: Keras class {name!r} not importable")
    return problems
