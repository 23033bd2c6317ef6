"""Dense feed-forward networks with sine, ReLU and Softplus hidden layers.

Everything is float64 and pure numpy. Hidden sine layers compute
``sin(omega0 * (W x) + b)``: the frequency scale multiplies the matrix
product only, the bias enters unscaled. Output heads are per-component
sigmoid or identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError

HIDDEN_KINDS = ("relu", "softplus", "sine")
OUTPUT_KINDS = ("linear", "sigmoid")
DEFAULT_OMEGA0 = 30.0


@dataclass(frozen=True)
class Activation:
    """An activation family; sine carries its frequency scale."""

    kind: str
    omega0: float = 0.0

    def __post_init__(self):
        if self.kind not in HIDDEN_KINDS + OUTPUT_KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "sine" and not self.omega0 > 0:
            raise ValueError("sine activation requires omega0 > 0")
        if self.kind != "sine" and self.omega0 != 0.0:
            raise ValueError(f"omega0 is only meaningful for sine, got {self.kind!r}")

    @staticmethod
    def relu() -> "Activation":
        return Activation("relu")

    @staticmethod
    def softplus() -> "Activation":
        return Activation("softplus")

    @staticmethod
    def sine(omega0: float = DEFAULT_OMEGA0) -> "Activation":
        return Activation("sine", omega0)

    @staticmethod
    def sigmoid() -> "Activation":
        return Activation("sigmoid")

    @staticmethod
    def linear() -> "Activation":
        return Activation("linear")


def sigmoid(x):
    """Numerically stable logistic function."""
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x):
    # log(1 + e^x), stable on both tails
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths plus hidden/output activation choices."""

    input_dim: int
    hidden_widths: tuple[int, ...]
    output_dim: int
    hidden_activation: Activation
    output_heads: tuple[Activation, ...]

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        object.__setattr__(self, "output_heads", tuple(self.output_heads))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be >= 1")
        if not self.hidden_widths or any(w < 1 for w in self.hidden_widths):
            raise ValueError("hidden_widths must be non-empty positive counts")
        if self.hidden_activation.kind not in HIDDEN_KINDS:
            raise ValueError(f"{self.hidden_activation.kind!r} is not a hidden activation")
        if len(self.output_heads) != self.output_dim:
            raise ValueError("need one output head per output component")
        for head in self.output_heads:
            if head.kind not in OUTPUT_KINDS:
                raise ValueError(f"{head.kind!r} is not an output head")

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_widths, self.output_dim)

    @staticmethod
    def uniform_heads(input_dim, hidden_widths, output_dim, hidden_activation, head):
        """Spec with the same head on every output component."""
        return NetworkSpec(
            input_dim,
            tuple(hidden_widths),
            output_dim,
            hidden_activation,
            (head,) * output_dim,
        )


def count_params(spec: NetworkSpec) -> int:
    """Total number of weights and biases."""
    dims = spec.layer_dims
    return sum(m * n + n for m, n in zip(dims[:-1], dims[1:]))


class Network:
    """Weights/biases realizing a NetworkSpec.

    ``weights[i]`` has shape (fan_out, fan_in); ``biases[i]`` has shape
    (fan_out,). Layer ``i < n_hidden`` is hidden, the last is the output
    layer.
    """

    def __init__(self, spec: NetworkSpec, weights, biases):
        dims = spec.layer_dims
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise ValueError("layer count mismatch")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (dims[i + 1], dims[i]) or b.shape != (dims[i + 1],):
                raise ValueError(f"tensor shape mismatch at layer {i}")
        self.spec = spec
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "Network":
        return Network(self.spec, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def check_finite(self):
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NonFiniteError(f"non-finite parameters in layer {i}")

    def hidden_preactivation(self, a, i):
        w, b = self.weights[i], self.biases[i]
        act = self.spec.hidden_activation
        if act.kind == "sine":
            return act.omega0 * (a @ w.T) + b
        return a @ w.T + b

    def forward(self, x):
        """Map inputs to outputs; accepts a vector or a (batch, dim) array."""
        x = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("non-finite network input")
        single = x.ndim == 1
        a = x[None, :] if single else x
        if a.shape[1] != self.spec.input_dim:
            raise ValueError("input dimension mismatch")
        kind = self.spec.hidden_activation.kind
        for i in range(self.n_layers - 1):
            pre = self.hidden_preactivation(a, i)
            if kind == "sine":
                a = np.sin(pre)
            elif kind == "relu":
                a = np.maximum(pre, 0.0)
            else:
                a = softplus(pre)
        y = a @ self.weights[-1].T + self.biases[-1]
        for j, head in enumerate(self.spec.output_heads):
            if head.kind == "sigmoid":
                y[:, j] = sigmoid(y[:, j])
        return y[0] if single else y


def init_siren(spec: NetworkSpec, seed: int) -> Network:
    """Sine-network initialization.

    First layer: U(-1/n, 1/n) with n the input dimension. Every later
    layer (hidden and output): U(-sqrt(6/m)/omega0, sqrt(6/m)/omega0)
    with m that layer's fan-in. Biases start at zero.
    """
    act = spec.hidden_activation
    if act.kind != "sine":
        raise ValueError("siren initialization requires sine hidden layers")
    rng = np.random.default_rng(seed)
    dims = spec.layer_dims
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        if i == 0:
            bound = 1.0 / spec.input_dim
        else:
            bound = np.sqrt(6.0 / fan_in) / act.omega0
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(spec, weights, biases)


def init_kaiming(spec: NetworkSpec, seed: int) -> Network:
    """Kaiming-normal initialization: N(0, 2/fan_in) per layer, zero biases."""
    if spec.hidden_activation.kind == "sine":
        raise ValueError("kaiming initialization is for relu/softplus networks")
    rng = np.random.default_rng(seed)
    dims = spec.layer_dims
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        std = np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, std, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(spec, weights, biases)


def init_network(spec: NetworkSpec, seed: int) -> Network:
    """Initializer matched to the hidden activation."""
    if spec.hidden_activation.kind == "sine":
        return init_siren(spec, seed)
    return init_kaiming(spec, seed)
