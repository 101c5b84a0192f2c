import numpy as np

from cotic_toolbox.utils import doubling_dilations, receptive_field, sequence_seed


# Test the doubling_dilations function
def test_doubling_dilations():

    assert doubling_dilations(0) == []
    assert doubling_dilations(1) == [1]
    assert doubling_dilations(4) == [1, 2, 4, 8]


# Test the receptive_field function
def test_receptive_field():

    assert receptive_field(5, []) == 1
    assert receptive_field(3, [1]) == 3
    assert receptive_field(3, [1, 2]) == 7
    assert receptive_field(5, [1, 2, 4]) == 29


# Test that the sequence_seed function only depends on the seed and the keys
def test_sequence_seed():

    a = np.random.default_rng(sequence_seed(0, b"abc", b"de")).uniform(size=4)
    b = np.random.default_rng(sequence_seed(0, b"abc", b"de")).uniform(size=4)
    c = np.random.default_rng(sequence_seed(1, b"abc", b"de")).uniform(size=4)
    d = np.random.default_rng(sequence_seed(0, b"abd", b"de")).uniform(size=4)

    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
