import pytest

from netforge.ir import IRModel, new_layer
from netforge.ir.model import add_layer
from netforge.zoo import fixture_names, load_fixture


@pytest.fixture(scope="session")
def zoo_models():
    """All bundled fixtures imported once per test session."""
    return {name: load_fixture(name) for name in fixture_names()}


@pytest.fixture
def toy_cnn():
    """Input -> Conv -> ReLU -> Pool -> InnerProduct -> Softmax chain."""
    m = IRModel(name="toy")
    m = add_layer(m, new_layer("data", "Input", params={"dim": [3, 32, 32]}), connections=[])
    m = add_layer(m, new_layer("conv1", "Convolution",
                               params={"num_output": 8, "kernel": [3, 3], "pad": [1, 1]}))
    m = add_layer(m, new_layer("relu1", "ReLU"))
    m = add_layer(m, new_layer("pool1", "Pooling",
                               params={"kernel": [2, 2], "stride": [2, 2]}))
    m = add_layer(m, new_layer("fc1", "InnerProduct", params={"num_output": 10}))
    m = add_layer(m, new_layer("prob", "Softmax"))
    return m


@pytest.fixture
def diamond():
    """Input fanning out to two convs that merge in a concat."""
    m = IRModel(name="diamond")
    m = add_layer(m, new_layer("data", "Input", params={"dim": [3, 16, 16]}), connections=[])
    m = add_layer(m, new_layer("a", "Convolution",
                               params={"num_output": 4, "kernel": [1, 1]}),
                  connections=[("data", "a")])
    m = add_layer(m, new_layer("b", "Convolution",
                               params={"num_output": 6, "kernel": [1, 1]}),
                  connections=[("data", "b")])
    m = add_layer(m, new_layer("cat", "Concat"),
                  connections=[("a", "cat"), ("b", "cat")])
    return m
