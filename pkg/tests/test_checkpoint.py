import numpy as np
import pytest

from gcnetlab import Activation, NetworkSpec, init_network
from gcnetlab.checkpoint import export_text, read_network, write_network
from gcnetlab.errors import CorruptHeaderError, TruncatedDataError


def roundtrip(tmp_path, spec, seed=4):
    net = init_network(spec, seed)
    path = tmp_path / "net.gcnet"
    write_network(path, net)
    return net, read_network(path), path


def test_roundtrip_bit_exact(tmp_path):
    spec = NetworkSpec(
        7,
        (16, 8),
        4,
        Activation.sine(30.0),
        (Activation.sigmoid(),) + (Activation.linear(),) * 3,
    )
    net, loaded, _ = roundtrip(tmp_path, spec)
    assert loaded.spec == net.spec
    for a, b in zip(net.weights + net.biases, loaded.weights + loaded.biases):
        assert np.array_equal(a, b)


def test_roundtrip_relu(tmp_path):
    spec = NetworkSpec.uniform_heads(3, [5], 2, Activation.relu(), Activation.sigmoid())
    net, loaded, _ = roundtrip(tmp_path, spec)
    x = np.random.default_rng(0).normal(size=(4, 3))
    assert np.array_equal(net.forward(x), loaded.forward(x))


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.gcnet"
    path.write_bytes(b"NOPE!" + b"\x00" * 64)
    with pytest.raises(CorruptHeaderError):
        read_network(path)


def test_truncated_tensor(tmp_path):
    spec = NetworkSpec.uniform_heads(3, [5], 2, Activation.relu(), Activation.linear())
    _, _, path = roundtrip(tmp_path, spec)
    blob = path.read_bytes()
    path.write_bytes(blob[:-16])
    with pytest.raises(TruncatedDataError):
        read_network(path)


def test_text_export_mentions_every_layer(tmp_path):
    spec = NetworkSpec.uniform_heads(2, [3, 3], 1, Activation.softplus(), Activation.linear())
    net = init_network(spec, 1)
    out = tmp_path / "net.txt"
    export_text(out, net)
    text = out.read_text()
    for i in range(3):
        assert f"layer {i} weight" in text
        assert f"layer {i} bias" in text
    # full-precision floats survive a parse round trip
    first = float(net.weights[0][0, 0])
    assert repr(first) in text
    assert float(repr(first)) == first
