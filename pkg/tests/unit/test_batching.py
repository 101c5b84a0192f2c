import numpy as np
from hypothesis import given, strategies as st
from numpy.testing import assert_array_equal

from cotic_toolbox.events.batching import Batch, batchify, split, split_sizes
from cotic_toolbox.events.sequence import Dataset, EventSequence
from cotic_toolbox.exceptions import InsufficientDataError


def random_dataset(n, seed=0, max_length=8):
    rng = np.random.default_rng(seed)
    sequences = []
    for i in range(n):
        length = int(rng.integers(0, max_length + 1))
        times = np.cumsum(rng.uniform(0.01, 0.1, length))
        sequences.append(EventSequence(times, rng.integers(1, 3, length), seq_id=str(i)))
    return Dataset(sequences, 2)


# TESTING THE SPLIT FUNCTIONS
# ------------------------------------------------------------------------------------------

# Test the split_sizes function
def test_split_sizes():

    assert split_sizes(10, (8, 1, 1)) == [8, 1, 1]
    assert split_sizes(3, (8, 1, 1)) == [1, 1, 1]
    assert split_sizes(100, (8, 1, 1)) == [80, 10, 10]
    assert split_sizes(15, (8, 1, 1)) == [13, 1, 1]
    assert split_sizes(5, (1, 1)) == [3, 2]


# Test the split_sizes function failures
def test_split_sizes_fail():

    try:
        split_sizes(2, (8, 1, 1))
    except InsufficientDataError:
        assert True
    else:
        assert False, "An expected InsufficientDataError exception was not raised by 'split_sizes'"

    try:
        split_sizes(10, (8, 0, 1))
    except ValueError:
        assert True
    else:
        assert False, "An expected ValueError exception was not raised by 'split_sizes'"


# Test that the split is a deterministic partition of the dataset
def test_split():

    dataset = random_dataset(100)
    train, val, test = split(dataset, seed=4)

    assert (len(train), len(val), len(test)) == (80, 10, 10)

    ids = [s.seq_id for part in (train, val, test) for s in part]
    assert sorted(ids) == sorted(s.seq_id for s in dataset)
    assert len(set(ids)) == len(ids)

    again = split(dataset, seed=4)
    assert all(a == b for a, b in zip((train, val, test), again))

    other = split(dataset, seed=5)
    assert other[1] != val or other[2] != test

    assert train.num_types == dataset.num_types
    assert train.time_scale == dataset.time_scale


# Test the partition property of the split on random dataset sizes
@given(st.integers(min_value=3, max_value=60), st.integers(min_value=0, max_value=1000))
def test_split_partition(n, seed):

    dataset = random_dataset(n, max_length=2)
    parts = split(dataset, seed=seed)

    assert sum(len(p) for p in parts) == n
    assert all(len(p) >= 1 for p in parts)
    ids = sorted(s.seq_id for p in parts for s in p)
    assert ids == sorted(str(i) for i in range(n))


# TESTING THE BATCH CLASS
# ------------------------------------------------------------------------------------------

# Test the padding of the Batch class
def test_Batch():

    short = EventSequence([0.1, 0.2, 0.3], [1, 2, 1], horizon=0.5, seq_id="s")
    long = EventSequence([0.1, 0.2, 0.3, 0.4, 0.6], [2, 2, 2, 1, 1], seq_id="l")
    batch = Batch([short, long])

    assert batch.max_length == 5
    assert_array_equal(batch.lengths, [3, 5])
    assert_array_equal(batch.mask[0], [True, True, True, False, False])
    assert_array_equal(batch.marks[0], [1, 2, 1, 0, 0])
    assert batch.seq_ids == ["s", "l"]

    restored = batch.unpad()
    assert restored[0] == short
    assert restored[1] == long


# Test the batchify function
def test_batchify():

    dataset = random_dataset(10, seed=2)

    batches = batchify(dataset.sequences, 3)
    assert [len(b) for b in batches] == [3, 3, 3, 1]
    assert [s for b in batches for s in b.unpad()] == dataset.sequences

    # Batches of one sequence are never padded
    for batch in batchify(dataset.sequences, 1):
        assert np.all(batch.mask)

    shuffled = batchify(dataset.sequences, 4, np.random.default_rng(0))
    ids = sorted(s.seq_id for b in shuffled for s in b.unpad())
    assert ids == sorted(s.seq_id for s in dataset)

    try:
        batchify(dataset.sequences, 0)
    except ValueError:
        assert True
    else:
        assert False, "An expected ValueError exception was not raised by 'batchify'"
