from os.path import isfile
from typing import Optional

import numpy as np
import pandas as pd

from cotic_toolbox.events.sequence import Dataset, EventSequence
from cotic_toolbox.exceptions import (
    DataFormatError,
    EmptyDatasetError,
    FileNotFound,
    SchemaMismatch,
)

ID_COLUMN = "seq_id"
TIME_COLUMN = "time"
TYPE_COLUMN = "event_type"


def _first_line(mask: pd.Series) -> int:
    """
    File line (header is line 1) of the first row flagged by a boolean mask
    """
    return int(np.flatnonzero(mask.to_numpy())[0]) + 2


def load_csv(
    path: str,
    time_column: str = TIME_COLUMN,
    type_column: str = TYPE_COLUMN,
    id_column: str = ID_COLUMN,
    time_scale: Optional[float] = None,
    num_types: Optional[int] = None,
) -> Dataset:
    """
    Loads a dataset of event sequences from a CSV file holding one event per row. Events are
    grouped by sequence identifier (sequences are ordered by first appearance in the file),
    sorted by time and normalized by the time scale.

    Parameters
    ----------
    path: str
        the path to the CSV file
    time_column: str
        the name of the column holding the event times (default: `time`)
    type_column: str
        the name of the column holding the event types (default: `event_type`)
    id_column: str
        the name of the column holding the sequence identifiers (default: `seq_id`)
    time_scale: Optional[float]
        the factor used to normalize the times. If set to None (default) the maximum raw time
        of the file is used (1 if it is zero)
    num_types: Optional[int]
        the number of event types K. If set to None (default) the largest observed type is used

    Raises
    ------
    FileNotFound
        exception raised when the path does not point to a file
    EmptyDatasetError
        exception raised when the file holds no event
    DataFormatError
        exception raised on a missing column, an unparsable or negative time, a type that is
        not a positive integer or a duplicated timestamp within a sequence (the file line is
        reported)
    SchemaMismatch
        exception raised when `num_types` is given and a type exceeds it

    Returns
    -------
    Dataset
        the normalized dataset
    """
    if not isfile(path):
        raise FileNotFound(path)

    try:
        frame = pd.read_csv(
            path,
            dtype={id_column: str},
            keep_default_na=False,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(path)
    except (pd.errors.ParserError, UnicodeDecodeError) as error:
        raise DataFormatError(f"unreadable event table ({error})")

    missing = [c for c in (id_column, time_column, type_column) if c not in frame.columns]
    if missing:
        raise DataFormatError("missing column(s) {}".format(", ".join(missing)))

    if len(frame) == 0:
        raise EmptyDatasetError(path)

    ids = frame[id_column]
    if ids.isna().any():
        raise DataFormatError("missing sequence identifier", line=_first_line(ids.isna()))

    times = pd.to_numeric(frame[time_column], errors="coerce")
    invalid = times.isna() | ~np.isfinite(times.fillna(0.0))
    if invalid.any():
        raise DataFormatError("invalid event time", line=_first_line(invalid))

    if (times < 0).any():
        raise DataFormatError("negative event time", line=_first_line(times < 0))

    types = pd.to_numeric(frame[type_column], errors="coerce")
    invalid = types.isna() | (types.fillna(0) < 1) | (types.fillna(0) % 1 != 0)
    if invalid.any():
        raise DataFormatError(
            "event types must be positive integers", line=_first_line(invalid)
        )
    types = types.astype(np.int64)

    events = pd.DataFrame({"seq": ids, "time": times.astype(np.float64), "type": types})

    duplicated = events.duplicated(subset=["seq", "time"], keep="first")
    if duplicated.any():
        raise DataFormatError(
            "duplicate timestamp within sequence '{}'".format(ids[duplicated].iloc[0]),
            line=_first_line(duplicated),
        )

    largest = int(events["type"].max())
    if num_types is None:
        num_types = largest
    elif largest > num_types:
        raise SchemaMismatch(
            f"the file holds event type {largest} but only {num_types} types are declared"
        )

    if time_scale is None:
        latest = float(events["time"].max())
        time_scale = latest if latest > 0 else 1.0

    sequences = []
    for seq_id, group in events.groupby("seq", sort=False):
        group = group.sort_values("time", kind="stable")
        raw = group["time"].to_numpy()
        sequences.append(
            EventSequence(
                raw / time_scale,
                group["type"].to_numpy(),
                seq_id=str(seq_id),
                raw_times=raw,
            )
        )

    return Dataset(sequences, num_types, time_scale)


def write_csv(dataset: Dataset, path: str) -> None:
    """
    Writes a dataset to a CSV file with header `seq_id,time,event_type`. Times are written in
    raw units with full float precision: the raw times of sequences read by `load_csv` are
    written verbatim, the others are multiplied back by the dataset time scale.

    Parameters
    ----------
    dataset: Dataset
        the dataset to save
    path: str
        the destination path
    """
    ids, times, types = [], [], []
    for sequence in dataset:
        ids.extend([sequence.seq_id] * len(sequence))
        if sequence.raw_times is not None:
            times.extend(sequence.raw_times)
        else:
            times.extend(sequence.times * dataset.time_scale)
        types.extend(sequence.marks)

    frame = pd.DataFrame(
        {
            ID_COLUMN: pd.Series(ids, dtype=object),
            TIME_COLUMN: pd.Series(times, dtype=np.float64),
            TYPE_COLUMN: pd.Series(types, dtype=np.int64),
        }
    )
    frame.to_csv(path, index=False)
