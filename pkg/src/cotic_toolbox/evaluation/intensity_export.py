from typing import Any, Optional

import numpy as np
import pandas as pd

from cotic_toolbox.events.sequence import EventSequence
from cotic_toolbox.model.cotic import IntensityCurve


def intensity_grid(sequence: EventSequence, grid_size: int) -> np.ndarray:
    """
    Uniform grid of `grid_size` points over `[0, t_k]` (over `[0, T]` if the sequence has no
    event after time 0)

    Raises
    ------
    ValueError
        exception raised if `grid_size` is smaller than 2 or the window is empty
    """
    if grid_size < 2:
        raise ValueError("The grid must hold at least two points.")

    upper = sequence.last_time if sequence.last_time > 0 else sequence.horizon
    if not upper > 0:
        raise ValueError("Cannot build a grid over an empty observation window.")

    return np.linspace(0.0, upper, grid_size)


def intensity_frame(curve: IntensityCurve) -> pd.DataFrame:
    """
    Tabular form of an intensity curve with columns `t, lambda_1, ..., lambda_K, lambda_total`
    """
    columns = {"t": curve.grid}
    for k in range(curve.num_types):
        columns[f"lambda_{k + 1}"] = curve.values[:, k]
    columns["lambda_total"] = curve.total
    return pd.DataFrame(columns)


def export_intensity(
    model: Any, sequence: EventSequence, grid_size: int, path: Optional[str] = None
) -> IntensityCurve:
    """
    Evaluates the per-type and total intensities of a model on a uniform grid over the
    observed window of a sequence and optionally writes them to a CSV file.

    Parameters
    ----------
    model: Any
        a `CoticModel` or any object exposing `intensity(sequence, query_times)`
    sequence: EventSequence
        the history the intensity is conditioned on
    grid_size: int
        the number of grid points (at least 2)
    path: Optional[str]
        the destination CSV file, with header `t,lambda_1,...,lambda_K,lambda_total`

    Returns
    -------
    IntensityCurve
        the evaluated curve
    """
    curve = model.intensity(sequence, intensity_grid(sequence, grid_size))
    if path is not None:
        intensity_frame(curve).to_csv(path, index=False)
    return curve


def intensity_rmse(model: Any, reference: Any, sequence: EventSequence, grid_size: int = 200) -> float:
    """
    Root mean square difference between the total intensities of a model and of a reference
    (e.g. the `HawkesOracle` of the generating process) on a uniform grid
    """
    grid = intensity_grid(sequence, grid_size)
    estimated = model.intensity(sequence, grid).total
    expected = reference.intensity(sequence, grid).total
    return float(np.sqrt(np.mean((estimated - expected) ** 2)))
