"""Analytic backpropagation through the three hidden-activation families.

The sine chain rule carries the same frequency-scale placement as the
forward pass: with pre = omega0 * (W a) + b, the weight gradient picks
up a factor omega0 while the bias gradient does not.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteError
from .losses import loss_grad, loss_value
from .network import Network, sigmoid, softplus


def backward(net: Network, inputs, targets, kind: str):
    """Gradient of the batch-mean loss for every weight and bias.

    Returns ``(loss, grad_weights, grad_biases)`` with gradient arrays
    shaped exactly like the corresponding parameters.
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    y_true = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    act = net.spec.hidden_activation

    # Forward pass, caching inputs and preactivations per layer.
    a = x
    layer_inputs = []
    pres = []
    for i in range(net.n_layers - 1):
        layer_inputs.append(a)
        pre = net.hidden_preactivation(a, i)
        if not np.all(np.isfinite(pre)):
            raise NonFiniteError(f"non-finite preactivation in layer {i}")
        pres.append(pre)
        if act.kind == "sine":
            a = np.sin(pre)
        elif act.kind == "relu":
            a = np.maximum(pre, 0.0)
        else:
            a = softplus(pre)
    layer_inputs.append(a)
    y_lin = a @ net.weights[-1].T + net.biases[-1]
    if not np.all(np.isfinite(y_lin)):
        raise NonFiniteError(f"non-finite preactivation in layer {net.n_layers - 1}")
    y = y_lin.copy()
    sig_cols = [j for j, h in enumerate(net.spec.output_heads) if h.kind == "sigmoid"]
    for j in sig_cols:
        y[:, j] = sigmoid(y[:, j])

    value = loss_value(kind, y, y_true)
    delta = loss_grad(kind, y, y_true)
    for j in sig_cols:
        delta[:, j] = delta[:, j] * y[:, j] * (1.0 - y[:, j])

    grad_w = [None] * net.n_layers
    grad_b = [None] * net.n_layers
    grad_w[-1] = delta.T @ layer_inputs[-1]
    grad_b[-1] = delta.sum(axis=0)
    da = delta @ net.weights[-1]
    for i in range(net.n_layers - 2, -1, -1):
        pre = pres[i]
        if act.kind == "sine":
            dpre = da * np.cos(pre)
            grad_w[i] = act.omega0 * (dpre.T @ layer_inputs[i])
            grad_b[i] = dpre.sum(axis=0)
            if i > 0:
                da = act.omega0 * (dpre @ net.weights[i])
        else:
            if act.kind == "relu":
                dpre = da * (pre > 0.0)
            else:
                dpre = da * sigmoid(pre)
            grad_w[i] = dpre.T @ layer_inputs[i]
            grad_b[i] = dpre.sum(axis=0)
            if i > 0:
                da = dpre @ net.weights[i]
    return value, grad_w, grad_b
