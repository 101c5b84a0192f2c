from typing import Optional

import matplotlib.pyplot as plt
import numpy as np

from cotic_toolbox.events.sequence import EventSequence
from cotic_toolbox.model.cotic import IntensityCurve
from cotic_toolbox.training.trainer import History

COLORS = ["blue", "red", "green", "purple", "brown", "black"]
TOTAL_COLOR = "black"
REFERENCE_COLOR = "gray"
TRAIN_COLOR = "blue"
VALIDATION_COLOR = "red"


def _finalize(fig: plt.Figure, path: Optional[str]) -> None:
    fig.tight_layout()
    if path is None:
        plt.show()
    else:
        fig.savefig(path)
        plt.close(fig)


def plot_intensity(
    curve: IntensityCurve,
    sequence: Optional[EventSequence] = None,
    reference: Optional[IntensityCurve] = None,
    per_type: bool = True,
    path: Optional[str] = None,
) -> plt.Figure:
    """
    Plots the total intensity of a curve (and, optionally, the intensity of each type) with
    the events of the conditioning sequence marked on the time axis.

    Parameters
    ----------
    curve: IntensityCurve
        the intensity curve to plot
    sequence: Optional[EventSequence]
        if given, its events are drawn as ticks colored by type
    reference: Optional[IntensityCurve]
        if given, its total intensity is drawn as a dashed line (e.g. the true intensity of
        a synthetic process)
    per_type: bool
        if set to True (default) the intensity of every type is drawn as well
    path: Optional[str]
        if given the figure is saved to this file instead of being shown

    Returns
    -------
    matplotlib.figure.Figure
        the figure
    """
    fig, ax = plt.subplots()

    if per_type and curve.num_types > 1:
        for k in range(curve.num_types):
            ax.plot(curve.grid, curve.values[:, k], c=COLORS[k % len(COLORS)], alpha=0.5, label=f"type {k + 1}")

    ax.plot(curve.grid, curve.total, c=TOTAL_COLOR, label="total")

    if reference is not None:
        ax.plot(reference.grid, reference.total, c=REFERENCE_COLOR, linestyle="--", label="reference")

    if sequence is not None and len(sequence) > 0:
        colors = [COLORS[(m - 1) % len(COLORS)] for m in sequence.marks]
        ax.scatter(sequence.times, np.zeros(len(sequence)), c=colors, marker="|", s=200)

    ax.set_xlabel("t")
    ax.set_ylabel(r"$\lambda(t)$")
    ax.legend()

    _finalize(fig, path)
    return fig


def plot_history(history: History, path: Optional[str] = None) -> plt.Figure:
    """
    Plot the convergence history of a training: the training and validation negative
    log-likelihood per epoch, with the end of the warm-up phase marked by a vertical line.

    Parameters
    ----------
    history: History
        the history returned by the trainer
    path: Optional[str]
        if given the figure is saved to this file instead of being shown

    Returns
    -------
    matplotlib.figure.Figure
        the figure
    """
    fig, ax = plt.subplots()

    epochs = history.column("epoch")
    ax.plot(epochs, history.column("train_ll"), c=TRAIN_COLOR, label="train")

    val = history.column("val_ll")
    if any(v is not None for v in val):
        ax.plot(epochs, [np.nan if v is None else v for v in val], c=VALIDATION_COLOR, label="validation")

    warmup = [e for e, p in zip(epochs, history.column("phase")) if p == "warmup"]
    if warmup and len(warmup) < len(epochs):
        ax.axvline(max(warmup) + 0.5, c="gray", linestyle=":")

    ax.set_xlabel("epoch")
    ax.set_ylabel("negative log-likelihood")
    ax.legend()

    _finalize(fig, path)
    return fig
