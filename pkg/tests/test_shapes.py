import pytest

from netforge.errors import (
    CyclicGraph,
    MissingInputShape,
    ShapeConflict,
)
from netforge.ir import (
    IRModel,
    TensorShape,
    add_layer,
    connect,
    conv_output_dim,
    infer_shapes,
    new_layer,
)


def build(*specs, edges=None):
    """specs: (id, type, params). Default edges chain them in order."""
    m = IRModel(name="t")
    prev = None
    for lid, t, params in specs:
        conns = None
        if edges is not None:
            conns = [(f, to) for f, to in edges if to == lid]
        elif prev is None:
            conns = []
        m = add_layer(m, new_layer(lid, t, params=params), connections=conns)
        prev = lid
    return m


def dims(shapes, lid):
    return list(shapes[lid].dims)


def test_conv_output_dim_floor():
    assert conv_output_dim(224, 3, 1, 1) == 224
    assert conv_output_dim(224, 7, 2, 3) == 112
    assert conv_output_dim(5, 2, 2, 0) == 2  # floor, not ceil


def test_conv_shape():
    m = build(("in", "Input", {"dim": [3, 224, 224]}),
              ("c", "Convolution", {"num_output": 64, "kernel": [3, 3], "pad": [1, 1]}))
    s = infer_shapes(m)
    assert dims(s, "c") == [64, 224, 224]


def test_conv_kernel_broadcast():
    # single window value applies to both spatial dims
    m = build(("in", "Input", {"dim": [3, 20, 20]}),
              ("c", "Convolution", {"num_output": 4, "kernel": [5], "stride": [2]}))
    s = infer_shapes(m)
    assert dims(s, "c") == [4, 8, 8]


def test_pool_and_deconv():
    m = build(("in", "Input", {"dim": [8, 14, 14]}),
              ("p", "Pooling", {"kernel": [2, 2], "stride": [2, 2]}),
              ("d", "Deconvolution", {"num_output": 4, "kernel": [2, 2], "stride": [2, 2]}))
    s = infer_shapes(m)
    assert dims(s, "p") == [8, 7, 7]
    assert dims(s, "d") == [4, 14, 14]  # exact inverse of the pool here


def test_inner_product_flattens():
    m = build(("in", "Input", {"dim": [3, 8, 8]}),
              ("fc", "InnerProduct", {"num_output": 10}))
    assert dims(infer_shapes(m), "fc") == [10]


def test_flatten_and_reshape():
    m = build(("in", "Input", {"dim": [2, 6, 6]}),
              ("f", "Flatten", {}),
              ("r", "Reshape", {"dim": [8, -1]}))
    s = infer_shapes(m)
    assert dims(s, "f") == [72]
    assert dims(s, "r") == [8, 9]


def test_reshape_count_mismatch():
    m = build(("in", "Input", {"dim": [2, 6, 6]}),
              ("r", "Reshape", {"dim": [5, 5]}))
    with pytest.raises(ShapeConflict):
        infer_shapes(m)


def test_concat_sums_axis():
    m = build(("in", "Input", {"dim": [3, 10, 10]}),
              ("a", "Convolution", {"num_output": 4, "kernel": [1, 1]}),
              ("b", "Convolution", {"num_output": 6, "kernel": [1, 1]}),
              ("cat", "Concat", {"axis": 1}),
              edges=[("in", "a"), ("in", "b"), ("a", "cat"), ("b", "cat")])
    assert dims(infer_shapes(m), "cat") == [10, 10, 10]


def test_concat_spatial_mismatch():
    m = build(("in", "Input", {"dim": [3, 10, 10]}),
              ("a", "Convolution", {"num_output": 4, "kernel": [1, 1]}),
              ("b", "Convolution", {"num_output": 4, "kernel": [3, 3]}),
              ("cat", "Concat", {"axis": 1}),
              edges=[("in", "a"), ("in", "b"), ("a", "cat"), ("b", "cat")])
    with pytest.raises(ShapeConflict):
        infer_shapes(m)


def test_eltwise_requires_equal_shapes():
    m = build(("in", "Input", {"dim": [3, 10, 10]}),
              ("a", "Convolution", {"num_output": 4, "kernel": [1, 1]}),
              ("b", "Convolution", {"num_output": 6, "kernel": [1, 1]}),
              ("add", "Eltwise", {}),
              edges=[("in", "a"), ("in", "b"), ("a", "add"), ("b", "add")])
    with pytest.raises(ShapeConflict):
        infer_shapes(m)


def test_embedding_and_recurrent():
    m = build(("in", "Input", {"dim": [12]}),
              ("emb", "Embedding", {"vocab": 100, "dim": 16}),
              ("seq", "LSTM", {"num_output": 8, "return_sequences": True}),
              ("last", "GRU", {"num_output": 4}))
    s = infer_shapes(m)
    assert dims(s, "emb") == [12, 16]
    assert dims(s, "seq") == [12, 8]
    assert dims(s, "last") == [4]


def test_window_larger_than_input_conflicts():
    m = build(("in", "Input", {"dim": [3, 4, 4]}),
              ("c", "Convolution", {"num_output": 2, "kernel": [7, 7]}))
    with pytest.raises(ShapeConflict):
        infer_shapes(m)


def test_missing_input_shape():
    m = build(("in", "Input", {}),
              ("r", "ReLU", {}))
    with pytest.raises(MissingInputShape):
        infer_shapes(m)


def test_input_shapes_override():
    m = build(("in", "Input", {"dim": [3, 8, 8]}),
              ("c", "Convolution", {"num_output": 2, "kernel": [3, 3]}))
    s = infer_shapes(m, input_shapes={"in": (1, 28, 28)})
    assert dims(s, "in") == [1, 28, 28]
    assert dims(s, "c") == [2, 26, 26]


def test_cycle_raises():
    m = build(("in", "Input", {"dim": [3, 8, 8]}),
              ("a", "ReLU", {}),
              ("b", "Sigmoid", {}))
    m = connect(m, "b", "a")
    with pytest.raises(CyclicGraph):
        infer_shapes(m)


def test_passthrough_types_keep_shape():
    m = build(("in", "Input", {"dim": [5, 9, 9]}),
              ("r", "ReLU", {}),
              ("d", "Dropout", {"ratio": 0.5}),
              ("n", "LRN", {"local_size": 5}),
              ("bn", "BatchNorm", {}),
              ("sm", "Softmax", {}))
    s = infer_shapes(m)
    for lid in ("r", "d", "n", "bn", "sm"):
        assert dims(s, lid) == [5, 9, 9]


def test_shapes_are_tensor_shape_values():
    m = build(("in", "Input", {"dim": [1, 2, 3]}))
    s = infer_shapes(m)
    assert isinstance(s["in"], TensorShape)
    assert s["in"].dims == (1, 2, 3)
