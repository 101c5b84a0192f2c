from __future__ import annotations

from typing import Iterator, List, Optional, Sequence, Union

import numpy as np


class EventSequence:
    """
    Class holding a realization of a marked temporal point process: a strictly increasing list
    of event times, the integer type (mark) of each event and the observation horizon. The
    class is immutable: all the arrays it exposes are read-only.

    Parameters
    ----------
    times: Union[numpy.ndarray, List[float]]
        the non-negative, strictly increasing event times
    marks: Union[numpy.ndarray, List[int]]
        the type of each event, as an integer in [1, K]
    horizon: Optional[float]
        the end of the observation window. If set to None (default) the time of the last
        event (or 0 for an empty sequence) is used
    seq_id: str
        the identifier of the sequence (default: "")
    raw_times: Optional[Union[numpy.ndarray, List[float]]]
        the event times as read from a file, before normalization (default: None). They are
        written back verbatim by `write_csv` and are ignored by the equality test.

    Raises
    ------
    ValueError
        exception raised when the times are not strictly increasing or negative, when the
        number of times and marks differ, when a mark is smaller than 1 or when the horizon
        precedes the last event
    """

    def __init__(
        self,
        times: Union[np.ndarray, Sequence[float]],
        marks: Union[np.ndarray, Sequence[int]],
        horizon: Optional[float] = None,
        seq_id: str = "",
        raw_times: Optional[Union[np.ndarray, Sequence[float]]] = None,
    ) -> None:

        t = np.array(times, dtype=np.float64).reshape(-1)
        m = np.array(marks, dtype=np.int64).reshape(-1)

        if len(t) != len(m):
            raise ValueError("Mismatch between the number of event times and marks.")

        raw = None
        if raw_times is not None:
            raw = np.array(raw_times, dtype=np.float64).reshape(-1)
            if len(raw) != len(t):
                raise ValueError("Mismatch between the number of event times and raw times.")
            raw.setflags(write=False)

        if len(t) > 0:
            if not np.all(np.isfinite(t)) or t[0] < 0:
                raise ValueError("Event times must be finite and non-negative.")
            if np.any(np.diff(t) <= 0):
                raise ValueError("Event times must be strictly increasing.")
            if np.any(m < 1):
                raise ValueError("Event types must be positive integers.")

        last = float(t[-1]) if len(t) > 0 else 0.0
        T = last if horizon is None else float(horizon)
        if T < last:
            raise ValueError("The horizon cannot precede the last event.")

        t.setflags(write=False)
        m.setflags(write=False)

        self.__times = t
        self.__marks = m
        self.__horizon = T
        self.__seq_id = str(seq_id)
        self.__raw_times = raw

    def __len__(self) -> int:
        return len(self.__times)

    def __repr__(self) -> str:
        return "EventSequence(id='{}', events={}, horizon={:.6g})".format(
            self.__seq_id, len(self), self.__horizon
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventSequence):
            return NotImplemented
        return (
            self.__seq_id == other.seq_id
            and self.__horizon == other.horizon
            and np.array_equal(self.__times, other.times)
            and np.array_equal(self.__marks, other.marks)
        )

    def __ne__(self, other: object) -> bool:
        return not (self == other)

    @property
    def times(self) -> np.ndarray:
        """
        The event times
        """
        return self.__times

    @property
    def marks(self) -> np.ndarray:
        """
        The event types, integers in [1, K]
        """
        return self.__marks

    @property
    def horizon(self) -> float:
        """
        The end of the observation window
        """
        return self.__horizon

    @property
    def seq_id(self) -> str:
        return self.__seq_id

    @property
    def raw_times(self) -> Optional[np.ndarray]:
        """
        The event times before normalization, None if the sequence was not read from a file
        """
        return self.__raw_times

    @property
    def last_time(self) -> float:
        """
        The time of the last event (0 for an empty sequence)
        """
        return float(self.__times[-1]) if len(self) > 0 else 0.0

    @property
    def return_times(self) -> np.ndarray:
        """
        The gaps between consecutive events, `t_{j+1} - t_j`
        """
        return np.diff(self.__times)

    def counting(self, t: Union[float, np.ndarray]) -> Union[int, np.ndarray]:
        """
        The counting process `N(t)`, number of events strictly before `t`

        Parameters
        ----------
        t: Union[float, numpy.ndarray]
            the query time(s)

        Returns
        -------
        Union[int, numpy.ndarray]
            the number of events occurred strictly before each query
        """
        counts = np.searchsorted(self.__times, t, side="left")
        return int(counts) if np.ndim(counts) == 0 else counts

    def truncated(self, k: int) -> EventSequence:
        """
        Returns the sequence made of the first `k` events, with the horizon set to the last
        kept event
        """
        if k < 0:
            raise ValueError("The number of kept events must be non-negative.")
        raw = None if self.__raw_times is None else self.__raw_times[:k]
        return EventSequence(self.__times[:k], self.__marks[:k], seq_id=self.__seq_id, raw_times=raw)

    def with_event(self, index: int, time: Optional[float] = None, mark: Optional[int] = None) -> EventSequence:
        """
        Returns a copy of the sequence in which the event at `index` has a new time and/or mark.
        The horizon is extended if needed.
        """
        times = self.__times.copy()
        marks = self.__marks.copy()
        if time is not None:
            times[index] = time
        if mark is not None:
            marks[index] = mark
        horizon = max(self.__horizon, float(times[-1]))
        return EventSequence(times, marks, horizon=horizon, seq_id=self.__seq_id)


class Dataset:
    """
    Collection of event sequences sharing the same number of event types and the same time
    normalization.

    Parameters
    ----------
    sequences: List[EventSequence]
        the event sequences
    num_types: int
        the number of event types K
    time_scale: float
        the positive factor the raw times were divided by (default: 1.0)

    Raises
    ------
    ValueError
        exception raised when `num_types` or `time_scale` are not positive or when a sequence
        holds a mark greater than `num_types`
    """

    def __init__(
        self, sequences: List[EventSequence], num_types: int, time_scale: float = 1.0
    ) -> None:

        if num_types < 1:
            raise ValueError("The number of event types must be a positive integer.")

        if not time_scale > 0:
            raise ValueError("The time scale must be positive.")

        for sequence in sequences:
            if len(sequence) > 0 and int(sequence.marks.max()) > num_types:
                raise ValueError(
                    f"Sequence '{sequence.seq_id}' holds an event type greater than {num_types}."
                )

        self.__sequences = list(sequences)
        self.__num_types = int(num_types)
        self.__time_scale = float(time_scale)

    def __len__(self) -> int:
        return len(self.__sequences)

    def __iter__(self) -> Iterator[EventSequence]:
        return iter(self.__sequences)

    def __getitem__(self, index: int) -> EventSequence:
        return self.__sequences[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.__num_types == other.num_types
            and self.__time_scale == other.time_scale
            and self.__sequences == other.sequences
        )

    def __ne__(self, other: object) -> bool:
        return not (self == other)

    @property
    def sequences(self) -> List[EventSequence]:
        return list(self.__sequences)

    @property
    def num_types(self) -> int:
        """
        The number of event types K
        """
        return self.__num_types

    @property
    def time_scale(self) -> float:
        """
        The factor the raw times were divided by
        """
        return self.__time_scale

    @property
    def n_events(self) -> int:
        """
        The total number of events in the dataset
        """
        return sum(len(s) for s in self.__sequences)

    def subset(self, indices: Sequence[int]) -> Dataset:
        """
        Returns the dataset made of the sequences at the given positions
        """
        return Dataset(
            [self.__sequences[i] for i in indices], self.__num_types, self.__time_scale
        )

    def normalized(self, time_scale: Optional[float] = None) -> Dataset:
        """
        Returns a copy of the dataset with the times divided by `time_scale`. If `time_scale`
        is None the maximum event time of the dataset is used (1 if it is zero). The resulting
        dataset records the cumulated scale.
        """
        if time_scale is None:
            latest = max((s.last_time for s in self.__sequences), default=0.0)
            time_scale = latest if latest > 0 else 1.0

        sequences = [
            EventSequence(
                s.times / time_scale, s.marks, horizon=s.horizon / time_scale, seq_id=s.seq_id
            )
            for s in self.__sequences
        ]
        return Dataset(sequences, self.__num_types, self.__time_scale * time_scale)
