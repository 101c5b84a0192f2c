import warnings
from dataclasses import replace
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from cotic_toolbox.evaluation.metrics import evaluate
from cotic_toolbox.events.batching import split
from cotic_toolbox.events.sequence import Dataset
from cotic_toolbox.exceptions import NoPredictionsError
from cotic_toolbox.model.cotic import CoticModel, ModelConfig
from cotic_toolbox.training.trainer import TrainConfig, Trainer
from cotic_toolbox.utils import receptive_field

AXES = {"layers": "num_layers", "kernel_size": "kernel_size", "activation": "activation"}

COLUMNS = [
    "axis",
    "value",
    "num_layers",
    "kernel_size",
    "activation",
    "receptive_field",
    "ll_per_event",
    "return_mae",
    "type_accuracy",
    "n_predictions",
    "best_epoch",
    "status",
]


def _cell_config(base: ModelConfig, axis: str, value: Any) -> ModelConfig:
    overrides: Dict[str, Any] = {AXES[axis]: value}
    if axis == "layers":
        overrides["num_layers"] = int(value)
        if base.dilations is not None and len(base.dilations) != int(value):
            overrides["dilations"] = None
    elif axis == "kernel_size":
        overrides["kernel_size"] = int(value)
    else:
        overrides["activation"] = str(value)
    return replace(base, **overrides)


def ablation_sweep(
    dataset: Dataset,
    axis: str,
    values: Sequence[Any],
    model_config: ModelConfig,
    train_config: TrainConfig,
    split_seed: int = 0,
    n_mc: int = 100,
    eval_seed: int = 0,
    verbose: bool = False,
) -> pd.DataFrame:
    """
    Trains and evaluates one model per value of a hyperparameter. The dataset is split once
    (8:1:1) and every cell shares the split, the initialization seed and the training seed.
    A cell whose training or evaluation fails is reported with status `error: <message>`
    without interrupting the sweep.

    Parameters
    ----------
    dataset: Dataset
        the normalized dataset
    axis: str
        the swept hyperparameter: `layers`, `kernel_size` or `activation`
    values: Sequence[Any]
        the values taken by the hyperparameter
    model_config: ModelConfig
        the configuration of the other hyperparameters
    train_config: TrainConfig
        the training settings
    split_seed: int
        the seed of the train/validation/test split (default: 0)
    n_mc: int
        the Monte-Carlo samples used for evaluation (default: 100)
    eval_seed: int
        the seed of the evaluation draws (default: 0)
    verbose: bool
        if set to True the progress of the sweep is printed on terminal

    Raises
    ------
    ValueError
        exception raised if the axis is unknown or no value is given

    Returns
    -------
    pandas.DataFrame
        one row per value, with the configuration, the receptive field and the test metrics
    """
    if axis not in AXES:
        raise ValueError(f"'{axis}' is not a valid sweep axis, use one of {list(AXES)}")

    if len(values) == 0:
        raise ValueError("At least one value is required for a sweep.")

    train, val, test = split(dataset, (8, 1, 1), seed=split_seed)

    rows: List[Dict[str, Any]] = []
    for value in values:

        if verbose:
            print(f"\nSweep {axis} = {value}")

        row: Dict[str, Any] = {"axis": axis, "value": value}
        try:
            config = _cell_config(model_config, axis, value)
            row.update(
                num_layers=config.num_layers,
                kernel_size=config.kernel_size,
                activation=config.activation,
                receptive_field=(
                    np.nan
                    if config.kernel_size is None
                    else receptive_field(config.kernel_size, config.layer_dilations)
                ),
            )

            model = CoticModel(config)
            trainer = Trainer(model, train_config)
            trainer.fit(train, val)
            row["best_epoch"] = trainer.best_epoch

            try:
                report = evaluate(model, test, n_mc, eval_seed)
            except NoPredictionsError as error:
                report = error.report

            row.update(
                ll_per_event=report.ll_per_event,
                return_mae=report.return_mae,
                type_accuracy=report.type_accuracy,
                n_predictions=report.n_predictions,
                status="ok",
            )

        except Exception as error:
            warnings.warn(f"Sweep cell {axis}={value} failed: {error}")
            row["status"] = f"error: {error}"

        if verbose:
            print(f" -> {row.get('status')}, ll/event {row.get('ll_per_event', np.nan)}")

        rows.append(row)

    return pd.DataFrame(rows).reindex(columns=COLUMNS)


def write_sweep(table: pd.DataFrame, path: str) -> None:
    """
    Saves a sweep table to a CSV file
    """
    table.to_csv(path, index=False)


def parse_values(axis: str, text: str) -> List[Any]:
    """
    Parses a comma separated list of sweep values (integers for `layers` and `kernel_size`)
    """
    if axis not in AXES:
        raise ValueError(f"'{axis}' is not a valid sweep axis, use one of {list(AXES)}")
    items = [item.strip() for item in text.split(",") if item.strip()]
    return [str(item) if axis == "activation" else int(item) for item in items]
