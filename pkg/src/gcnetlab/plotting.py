"""Self-contained SVG plots for loss curves and error distributions."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "gcnetlab"

import matplotlib.pyplot as plt
import numpy as np

COLORS = {"sine": "tab:blue", "relu": "tab:orange", "softplus": "tab:green"}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_loss_curves(curves: dict, path, title: str = "training loss"):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6), constrained_layout=True)
    for name, curve in curves.items():
        color = COLORS.get(name)
        epochs = np.arange(len(curve.train_loss))
        ax1.semilogy(epochs, curve.train_loss, label=name, color=color)
        ax2.semilogy(epochs, curve.val_loss, label=name, color=color)
    ax1.set_title(title)
    ax2.set_title("validation loss")
    for ax in (ax1, ax2):
        ax.set_xlabel("epoch")
        ax.grid(alpha=0.3)
    ax1.set_ylabel("loss")
    ax1.legend()
    _save(fig, path)


def plot_error_boxes(reports, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6), constrained_layout=True)
    labels = [r.label for r in reports]
    pos = [r.pos_err[~r.failed] for r in reports]
    vel = [r.vel_err[~r.failed] for r in reports]
    for ax, data, name in ((ax1, pos, "final position error"),
                           (ax2, vel, "final velocity error")):
        ax.boxplot(data, tick_labels=labels, whis=(5, 95))
        ax.set_yscale("log")
        ax.set_title(name)
        ax.grid(alpha=0.3)
    _save(fig, path)
