from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from cotic_toolbox.events.sequence import Dataset, EventSequence
from cotic_toolbox.exceptions import InsufficientDataError


def split_sizes(n: int, ratios: Sequence[float]) -> List[int]:
    """
    Computes the number of sequences assigned to each part of a split. Every part but the first
    receives the floor of its share (at least one sequence), the first part (the training set)
    receives the remainder.

    Parameters
    ----------
    n: int
        the number of sequences to split
    ratios: Sequence[float]
        the positive relative size of each part

    Raises
    ------
    ValueError
        exception raised if a ratio is not positive
    InsufficientDataError
        exception raised if there are fewer sequences than parts

    Returns
    -------
    List[int]
        the size of each part
    """
    if len(ratios) == 0 or any(r <= 0 for r in ratios):
        raise ValueError("The split ratios must be a non-empty list of positive numbers.")

    if n < len(ratios):
        raise InsufficientDataError(
            f"cannot split {n} sequence(s) into {len(ratios)} non-empty parts"
        )

    total = float(sum(ratios))
    tail = [max(1, int(np.floor(n * r / total))) for r in ratios[1:]]
    head = n - sum(tail)
    if head < 1:
        raise InsufficientDataError(
            f"no sequence left for the first part when splitting {n} sequence(s)"
        )

    return [head] + tail


def split(
    dataset: Dataset, ratios: Sequence[float] = (8, 1, 1), seed: int = 0
) -> Tuple[Dataset, ...]:
    """
    Partitions a dataset by whole sequences (by default in train, validation and test parts
    with ratio 8:1:1). The assignment is a random permutation drawn from `seed`; inside each
    part the sequences keep their dataset order.

    Parameters
    ----------
    dataset: Dataset
        the dataset to split
    ratios: Sequence[float]
        the relative size of each part (default: (8, 1, 1))
    seed: int
        the seed of the permutation (default: 0)

    Raises
    ------
    ValueError
        exception raised if a ratio is not positive
    InsufficientDataError
        exception raised if the dataset holds fewer sequences than parts

    Returns
    -------
    Tuple[Dataset, ...]
        one dataset per ratio, sharing the number of types and time scale of the input
    """
    sizes = split_sizes(len(dataset), ratios)
    permutation = np.random.default_rng(seed).permutation(len(dataset))

    parts, start = [], 0
    for size in sizes:
        indices = np.sort(permutation[start : start + size])
        parts.append(dataset.subset([int(i) for i in indices]))
        start += size

    return tuple(parts)


class Batch:
    """
    Group of event sequences padded to the length of the longest one. Padded time entries are
    set to 0, padded marks to 0 (not a valid type) and flagged as False in `mask`.

    Parameters
    ----------
    sequences: List[EventSequence]
        the sequences to group (at least one)
    """

    def __init__(self, sequences: List[EventSequence]) -> None:

        if len(sequences) == 0:
            raise ValueError("A batch must hold at least one sequence.")

        lengths = np.array([len(s) for s in sequences], dtype=np.int64)
        width = int(lengths.max())

        times = np.zeros((len(sequences), width), dtype=np.float64)
        marks = np.zeros((len(sequences), width), dtype=np.int64)
        for row, sequence in enumerate(sequences):
            times[row, : len(sequence)] = sequence.times
            marks[row, : len(sequence)] = sequence.marks

        mask = np.arange(width)[None, :] < lengths[:, None]

        for array in (times, marks, lengths, mask):
            array.setflags(write=False)

        self.__times = times
        self.__marks = marks
        self.__lengths = lengths
        self.__mask = mask
        self.__seq_ids = [s.seq_id for s in sequences]
        self.__horizons = [s.horizon for s in sequences]

    def __len__(self) -> int:
        return len(self.__lengths)

    @property
    def times(self) -> np.ndarray:
        """
        The (B, L_max) padded event times
        """
        return self.__times

    @property
    def marks(self) -> np.ndarray:
        """
        The (B, L_max) padded event types (0 on padding)
        """
        return self.__marks

    @property
    def lengths(self) -> np.ndarray:
        return self.__lengths

    @property
    def mask(self) -> np.ndarray:
        """
        Boolean (B, L_max) matrix, True on real events and False on padding
        """
        return self.__mask

    @property
    def max_length(self) -> int:
        return int(self.__times.shape[1])

    @property
    def seq_ids(self) -> List[str]:
        return list(self.__seq_ids)

    def unpad(self) -> List[EventSequence]:
        """
        Recovers the original sequences of the batch
        """
        return [
            EventSequence(
                self.__times[row, :n], self.__marks[row, :n], horizon=T, seq_id=seq_id
            )
            for row, (n, T, seq_id) in enumerate(
                zip(self.__lengths, self.__horizons, self.__seq_ids)
            )
        ]


def batchify(
    sequences: Sequence[EventSequence],
    batch_size: int,
    rng: Optional[np.random.Generator] = None,
) -> List[Batch]:
    """
    Groups sequences in padded batches of at most `batch_size` elements.

    Parameters
    ----------
    sequences: Sequence[EventSequence]
        the sequences to group
    batch_size: int
        the maximum number of sequences per batch
    rng: Optional[numpy.random.Generator]
        if given, the sequences are shuffled with it before grouping

    Raises
    ------
    ValueError
        exception raised if `batch_size` is smaller than one

    Returns
    -------
    List[Batch]
        the batches, covering every sequence exactly once
    """
    if batch_size < 1:
        raise ValueError("The batch size must be a positive integer.")

    order = np.arange(len(sequences))
    if rng is not None:
        order = rng.permutation(len(sequences))

    return [
        Batch([sequences[int(i)] for i in order[start : start + batch_size]])
        for start in range(0, len(order), batch_size)
    ]
