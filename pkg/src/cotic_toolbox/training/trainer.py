from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, fields
from os.path import isfile
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from cotic_toolbox.events.batching import batchify
from cotic_toolbox.events.sequence import Dataset
from cotic_toolbox.exceptions import ConfigurationError, FileNotFound, TrainingDiverged
from cotic_toolbox.model.checkpoint import save_checkpoint
from cotic_toolbox.model.cotic import CoticModel
from cotic_toolbox.ndarr.tensor import Tensor, backward
from cotic_toolbox.training.losses import Phase, batch_loss, nll
from cotic_toolbox.training.optimizer import Adam


@dataclass
class TrainConfig:
    """
    Settings of the two-phase training procedure.

    Parameters
    ----------
    lr: float
        the Adam learning rate (default: 1e-3)
    beta1: float
        the Adam first-moment decay (default: 0.9)
    beta2: float
        the Adam second-moment decay (default: 0.999)
    eps: float
        the Adam denominator offset (default: 1e-8)
    epochs_max: int
        the maximum number of epochs (default: 100)
    warmup_epochs: int
        the number N0 of initial epochs in which only the likelihood is optimized and the
        prediction heads are frozen (default: 10)
    batch_size: int
        the number of sequences per optimizer step (default: 32)
    alpha: float
        the weight of the return-time loss in the joint phase (default: 1.0)
    beta: float
        the weight of the event-type loss in the joint phase (default: 1.0)
    n_mc: int
        the Monte-Carlo samples per sequence for the compensator (default: 100)
    seed: int
        the seed of the shuffling and Monte-Carlo draws (default: 0)
    patience: int
        the number of epochs without validation improvement before stopping (default: 15)
    clip_norm: float
        the maximum global gradient norm, larger gradients are rescaled (default: 10.0)
    detach_heads: bool
        if True (default) the head losses do not propagate into the backbone
    verbose: bool
        if True a summary line is printed at each epoch (default: False)
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs_max: int = 100
    warmup_epochs: int = 10
    batch_size: int = 32
    alpha: float = 1.0
    beta: float = 1.0
    n_mc: int = 100
    seed: int = 0
    patience: int = 15
    clip_norm: float = 10.0
    detach_heads: bool = True
    verbose: bool = False

    def __post_init__(self) -> None:

        if not self.lr > 0 or not self.eps > 0:
            raise ConfigurationError("lr and eps must be positive")

        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigurationError("beta1 and beta2 must lie in (0, 1)")

        if self.epochs_max < 1:
            raise ConfigurationError("epochs_max must be a positive integer")

        if not 0 <= self.warmup_epochs <= self.epochs_max:
            raise ConfigurationError("warmup_epochs must lie in [0, epochs_max]")

        if self.batch_size < 1 or self.n_mc < 1 or self.patience < 1:
            raise ConfigurationError("batch_size, n_mc and patience must be positive integers")

        if self.alpha < 0 or self.beta < 0:
            raise ConfigurationError("the loss weights alpha and beta must be non-negative")

        if not self.clip_norm > 0:
            raise ConfigurationError("clip_norm must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EpochRecord:
    """
    Summary of one training epoch. All the losses are means over sequences.
    """

    epoch: int
    phase: str
    train_ll: float
    val_ll: Optional[float]
    train_time: float
    train_type: float
    wall_seconds: float
    clipped_steps: int
    rejected_steps: int


class History:
    """
    Ordered list of epoch records, saved as JSON lines (one record per line).

    Parameters
    ----------
    records: Optional[List[EpochRecord]]
        the initial records (default: none)
    """

    def __init__(self, records: Optional[List[EpochRecord]] = None) -> None:
        self.__records: List[EpochRecord] = list(records or [])

    def __len__(self) -> int:
        return len(self.__records)

    def __iter__(self) -> Iterator[EpochRecord]:
        return iter(self.__records)

    def __getitem__(self, index: int) -> EpochRecord:
        return self.__records[index]

    def append(self, record: EpochRecord) -> None:
        self.__records.append(record)

    @property
    def records(self) -> List[EpochRecord]:
        return list(self.__records)

    def column(self, name: str) -> List[Any]:
        """
        The values of one record field across epochs
        """
        return [getattr(r, name) for r in self.__records]

    def save(self, path: str) -> None:
        with open(path, "w") as file:
            for record in self.__records:
                file.write(json.dumps(asdict(record)) + "\n")

    @classmethod
    def load(cls, path: str) -> History:
        if not isfile(path):
            raise FileNotFound(path)

        names = {f.name for f in fields(EpochRecord)}
        records = []
        with open(path, "r") as file:
            for line in file:
                if line.strip():
                    content = json.loads(line)
                    records.append(EpochRecord(**{k: content[k] for k in names}))
        return cls(records)


def validation_nll(model: CoticModel, dataset: Dataset, n_mc: int, seed: int) -> float:
    """
    Mean negative log-likelihood of the sequences of a dataset, with Monte-Carlo draws taken
    from a generator freshly seeded with `seed`
    """
    rng = np.random.default_rng(seed)
    values = [
        float(nll(lambda q, s=s: model.intensity_tensor(s, q), s, n_mc, rng).value)
        for s in dataset
    ]
    return float(np.mean(values))


def _clip(parameters: Dict[str, Tensor], max_norm: float) -> bool:
    """
    Rescales the gradients so that their global norm does not exceed `max_norm`. Returns True
    if clipping occurred.
    """
    squares = [float(np.sum(p.grad * p.grad)) for p in parameters.values() if p.grad is not None]
    norm = float(np.sqrt(np.sum(squares)))
    if not np.isfinite(norm) or norm <= max_norm:
        return False

    factor = max_norm / norm
    for parameter in parameters.values():
        if parameter.grad is not None:
            parameter.grad = parameter.grad * factor
    return True


class Trainer:
    """
    Two-phase trainer of a `CoticModel`. During the first `warmup_epochs` epochs only the
    backbone and intensity head are optimized, by the negative log-likelihood, while the
    prediction heads stay frozen. Afterwards all the parameters are optimized with the
    combined loss; the Adam moments of the head parameters are reset when they are unfrozen.
    The parameters reaching the best validation likelihood are restored at the end (and
    saved to `checkpoint_path` each time they improve).

    Parameters
    ----------
    model: CoticModel
        the model to train (modified in place)
    config: TrainConfig
        the training settings
    checkpoint_path: Optional[str]
        if given, the best model is saved to this HDF5 file
    metadata: Optional[Dict[str, Any]]
        information stored in the checkpoint alongside the model
    """

    def __init__(
        self,
        model: CoticModel,
        config: TrainConfig,
        checkpoint_path: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.__model = model
        self.__config = config
        self.__checkpoint_path = checkpoint_path
        self.__metadata = metadata or {}
        self.__best_epoch = 0

    @property
    def model(self) -> CoticModel:
        return self.__model

    @property
    def best_epoch(self) -> int:
        """
        The epoch whose parameters were restored at the end of `fit` (0 for the initialization)
        """
        return self.__best_epoch

    def fit(self, train: Dataset, val: Optional[Dataset] = None) -> History:
        """
        Runs the training.

        Parameters
        ----------
        train: Dataset
            the training sequences
        val: Optional[Dataset]
            the validation sequences used for model selection and early stopping. If None or
            empty the training likelihood is monitored instead

        Raises
        ------
        ValueError
            exception raised if the training set is empty
        TrainingDiverged
            exception raised on a non-finite loss, after restoring the best parameters

        Returns
        -------
        History
            the per-epoch records
        """
        if len(train) == 0:
            raise ValueError("The training set must contain at least one sequence.")

        config, model = self.__config, self.__model
        rng = np.random.default_rng(config.seed)
        adam = Adam(config.lr, config.beta1, config.beta2, config.eps)
        history = History()

        best_value, best_snapshot, stale = np.inf, model.snapshot(), 0
        self.__best_epoch = 0

        if config.verbose:
            print(f"\nTraining on {len(train)} sequences ({train.n_events} events)")
            print(f" -> warm-up epochs: {config.warmup_epochs}, max epochs: {config.epochs_max}")
            print("")

        for epoch in range(1, config.epochs_max + 1):

            start = time.perf_counter()
            phase = Phase.warmup if epoch <= config.warmup_epochs else Phase.joint

            if epoch == config.warmup_epochs + 1:
                adam.reset(model.head_parameters().keys())

            trainable = (
                model.backbone_parameters() if phase == Phase.warmup else model.named_parameters()
            )

            sums = np.zeros(3)
            clipped = rejected = 0
            for batch in batchify(train.sequences, config.batch_size, rng):
                loss, report = batch_loss(
                    model,
                    batch,
                    config.n_mc,
                    rng,
                    config.alpha,
                    config.beta,
                    phase,
                    config.detach_heads,
                )

                if not np.isfinite(report.combined):
                    model.restore(best_snapshot)
                    raise TrainingDiverged(epoch, history)

                model.zero_grad()
                backward(loss)
                clipped += _clip(trainable, config.clip_norm)
                rejected += not adam.step(trainable)

                sums += len(batch) * np.array([report.ll, report.time, report.type])

            means = sums / len(train)
            val_ll = (
                validation_nll(model, val, config.n_mc, config.seed + 1)
                if val is not None and len(val) > 0
                else None
            )
            monitored = means[0] if val_ll is None else val_ll

            if not np.isfinite(monitored):
                model.restore(best_snapshot)
                raise TrainingDiverged(epoch, history)

            if monitored < best_value:
                best_value, best_snapshot, stale = monitored, model.snapshot(), 0
                self.__best_epoch = epoch
                if self.__checkpoint_path is not None:
                    save_checkpoint(model, self.__checkpoint_path, self.__metadata)
            else:
                stale += 1

            record = EpochRecord(
                epoch=epoch,
                phase=phase.value,
                train_ll=float(means[0]),
                val_ll=val_ll,
                train_time=float(means[1]),
                train_type=float(means[2]),
                wall_seconds=time.perf_counter() - start,
                clipped_steps=int(clipped),
                rejected_steps=int(rejected),
            )
            history.append(record)

            if config.verbose:
                print(
                    f" epoch {epoch:4d} [{phase.value:>6}]  train ll {record.train_ll:.6f}"
                    + ("" if val_ll is None else f"  val ll {val_ll:.6f}")
                    + f"  time {record.train_time:.6f}  type {record.train_type:.6f}"
                )

            if stale >= config.patience:
                if config.verbose:
                    print(f" -> early stopping, best epoch {self.__best_epoch}")
                break

        model.restore(best_snapshot)
        return history


def train(
    model: CoticModel,
    train_set: Dataset,
    val_set: Optional[Dataset],
    config: TrainConfig,
    checkpoint_path: Optional[str] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Tuple[CoticModel, History]:
    """
    Trains a model with a `Trainer` and returns it together with the training history
    """
    history = Trainer(model, config, checkpoint_path, metadata).fit(train_set, val_set)
    return model, history
