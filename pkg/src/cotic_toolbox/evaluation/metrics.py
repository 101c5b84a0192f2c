from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from os.path import isfile
from typing import Any

import numpy as np

from cotic_toolbox.events.sequence import Dataset
from cotic_toolbox.exceptions import FileNotFound, NoPredictionsError
from cotic_toolbox.model.cotic import CoticModel
from cotic_toolbox.training.losses import nll
from cotic_toolbox.utils import sequence_seed


@dataclass
class MetricsReport:
    """
    Dataclass holding the evaluation metrics of a model on a dataset. The class implements a
    save and a load methods to save and load JSON formatted files.

    Arguments
    ---------
    ll_per_event: float
        the log-likelihood per event, `-(sum of the sequence NLLs) / (number of events)`, in
        normalized time units
    return_mae: float
        the mean absolute error of the return-time predictions (normalized time units)
    type_accuracy: float
        the fraction of correctly predicted next event types
    n_predictions: int
        the number of predictions, `sum(len - 1)` over the sequences
    n_events: int
        the number of events of the dataset
    return_mae_denormalized: float
        the return-time MAE in raw time units
    ll_per_event_raw: float
        the log-likelihood per event in raw time units
    time_scale: float
        the factor relating raw and normalized times
    """

    ll_per_event: float
    return_mae: float
    type_accuracy: float
    n_predictions: int
    n_events: int = 0
    return_mae_denormalized: float = float("nan")
    ll_per_event_raw: float = float("nan")
    time_scale: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str) -> None:
        """
        Saves the report to a JSON formatted file
        """
        with open(path, "w") as file:
            file.write(json.dumps(self.to_dict(), indent=4))

    @classmethod
    def load(cls, path: str) -> MetricsReport:
        """
        Loads a report saved with `save`

        Raises
        ------
        FileNotFound
            exception raised if the file does not exist
        """
        if not isfile(path):
            raise FileNotFound(path)

        with open(path, "r") as file:
            content = json.load(file)

        return cls(**{f.name: content[f.name] for f in fields(cls) if f.name in content})


def evaluate(model: Any, dataset: Dataset, n_mc: int = 100, seed: int = 0) -> MetricsReport:
    """
    Computes the log-likelihood per event, the return-time MAE and the event-type accuracy of
    a model. The prediction made at event k targets event k + 1 (the gap `t_{k+1} - t_k` and
    the type `m_{k+1}`); return-time predictions are clamped at zero and the predicted type is
    the arg-max of the scores, ties going to the lowest type. The Monte-Carlo draws of each
    sequence are seeded from `seed` and the sequence content, so that the report does not
    depend on the order of the dataset.

    Parameters
    ----------
    model: Any
        a `CoticModel` or any object exposing `intensity_tensor(sequence, query_times)` and
        `predict_heads(sequence)` (e.g. a `HawkesOracle`)
    dataset: Dataset
        the evaluation sequences
    n_mc: int
        the Monte-Carlo samples of each compensator (default: 100)
    seed: int
        the seed of the Monte-Carlo draws (default: 0)

    Raises
    ------
    ValueError
        exception raised if the dataset is empty
    NoPredictionsError
        exception raised if no sequence has at least two events. The partial report (with the
        log-likelihood) is attached to the exception

    Returns
    -------
    MetricsReport
        the evaluation metrics
    """
    if len(dataset) == 0:
        raise ValueError("Cannot evaluate a model on an empty dataset.")

    nlls, errors, hits = [], [], []
    for sequence in dataset:
        rng = np.random.default_rng(
            sequence_seed(seed, sequence.times.tobytes(), sequence.marks.tobytes())
        )
        h = model.backbone(sequence) if isinstance(model, CoticModel) else None

        value = nll(lambda q: model.intensity_tensor(sequence, q, embeddings=h), sequence, n_mc, rng)
        nlls.append(float(value.value))

        n = len(sequence)
        if n < 2:
            continue

        return_times, scores = model.predict_heads(sequence, embeddings=h)
        predicted = np.maximum(return_times.value[: n - 1, 0], 0.0)
        errors.extend(np.abs(predicted - sequence.return_times).tolist())
        types = np.argmax(scores.value[: n - 1], axis=1) + 1
        hits.extend((types == sequence.marks[1:]).tolist())

    n_events = dataset.n_events
    ll = -math.fsum(nlls) / n_events if n_events > 0 else float("nan")
    n_predictions = len(errors)
    mae = math.fsum(errors) / n_predictions if n_predictions > 0 else float("nan")
    accuracy = sum(hits) / n_predictions if n_predictions > 0 else float("nan")

    report = MetricsReport(
        ll_per_event=ll,
        return_mae=mae,
        type_accuracy=accuracy,
        n_predictions=n_predictions,
        n_events=n_events,
        return_mae_denormalized=mae * dataset.time_scale,
        ll_per_event_raw=ll - math.log(dataset.time_scale),
        time_scale=dataset.time_scale,
    )

    if n_predictions == 0:
        raise NoPredictionsError(report)

    return report
