"""Network checkpoint container.

Binary layout (all integers little-endian):

    magic   5 bytes  b"GCNET"
    version u32      currently 1
    input_dim u32, n_hidden u32, hidden widths u32 * n_hidden, output_dim u32
    hidden activation u8 (0 relu, 1 softplus, 2 sine)
    omega0  f64      0.0 unless sine
    head codes u8 * output_dim (0 linear, 1 sigmoid)
    per layer, in order: weight matrix row-major f64, then bias vector f64

A labelled text export is provided for diffing.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import CorruptHeaderError, TruncatedDataError
from .network import Activation, Network, NetworkSpec

MAGIC = b"GCNET"
VERSION = 1

_HIDDEN_CODES = {"relu": 0, "softplus": 1, "sine": 2}
_HIDDEN_NAMES = {v: k for k, v in _HIDDEN_CODES.items()}
_HEAD_CODES = {"linear": 0, "sigmoid": 1}
_HEAD_NAMES = {v: k for k, v in _HEAD_CODES.items()}


def write_network(path, net: Network) -> None:
    spec = net.spec
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<II", spec.input_dim, len(spec.hidden_widths)))
        fh.write(struct.pack(f"<{len(spec.hidden_widths)}I", *spec.hidden_widths))
        fh.write(struct.pack("<I", spec.output_dim))
        fh.write(struct.pack("<B", _HIDDEN_CODES[spec.hidden_activation.kind]))
        fh.write(struct.pack("<d", spec.hidden_activation.omega0))
        fh.write(struct.pack(f"<{spec.output_dim}B", *(_HEAD_CODES[h.kind] for h in spec.output_heads)))
        for w, b in zip(net.weights, net.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def _take(buf: memoryview, n: int, what: str):
    if len(buf) < n:
        raise TruncatedDataError(f"checkpoint ends inside {what}")
    return buf[:n], buf[n:]


def read_network(path) -> Network:
    with open(path, "rb") as fh:
        buf = memoryview(fh.read())
    head, buf = _take(buf, 5, "magic")
    if bytes(head) != MAGIC:
        raise CorruptHeaderError("bad checkpoint magic")
    raw, buf = _take(buf, 4, "version")
    (version,) = struct.unpack("<I", raw)
    if version != VERSION:
        raise CorruptHeaderError(f"unsupported checkpoint version {version}")
    raw, buf = _take(buf, 8, "dims")
    input_dim, n_hidden = struct.unpack("<II", raw)
    raw, buf = _take(buf, 4 * n_hidden, "hidden widths")
    hidden = struct.unpack(f"<{n_hidden}I", raw)
    raw, buf = _take(buf, 4, "output dim")
    (output_dim,) = struct.unpack("<I", raw)
    raw, buf = _take(buf, 1, "activation code")
    code = raw[0]
    if code not in _HIDDEN_NAMES:
        raise CorruptHeaderError(f"unknown activation code {code}")
    raw, buf = _take(buf, 8, "omega0")
    (omega0,) = struct.unpack("<d", raw)
    raw, buf = _take(buf, output_dim, "head codes")
    heads = []
    for c in raw:
        if c not in _HEAD_NAMES:
            raise CorruptHeaderError(f"unknown head code {c}")
        heads.append(getattr(Activation, _HEAD_NAMES[c])())
    kind = _HIDDEN_NAMES[code]
    act = Activation.sine(omega0) if kind == "sine" else Activation(kind)
    spec = NetworkSpec(input_dim, tuple(hidden), output_dim, act, tuple(heads))
    dims = spec.layer_dims
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        raw, buf = _take(buf, 8 * fan_in * fan_out, "weight tensor")
        weights.append(np.frombuffer(raw, dtype="<f8").reshape(fan_out, fan_in).copy())
        raw, buf = _take(buf, 8 * fan_out, "bias tensor")
        biases.append(np.frombuffer(raw, dtype="<f8").copy())
    if len(buf):
        raise CorruptHeaderError(f"{len(buf)} trailing bytes after tensors")
    return Network(spec, weights, biases)


def export_text(path, net: Network) -> None:
    """One labelled block per tensor, full float64 precision."""
    spec = net.spec
    with open(path, "w") as fh:
        fh.write(f"# network {spec.input_dim} -> {list(spec.hidden_widths)} -> {spec.output_dim}\n")
        fh.write(f"# hidden {spec.hidden_activation.kind}")
        if spec.hidden_activation.kind == "sine":
            fh.write(f" omega0 {spec.hidden_activation.omega0!r}")
        fh.write("\n# heads " + " ".join(h.kind for h in spec.output_heads) + "\n")
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            fh.write(f"layer {i} weight ({w.shape[0]}x{w.shape[1]})\n")
            for row in w:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
            fh.write(f"layer {i} bias ({b.shape[0]})\n")
            fh.write(" ".join(repr(float(v)) for v in b) + "\n")
