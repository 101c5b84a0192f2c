import hashlib
from typing import List, Sequence

import numpy as np


def doubling_dilations(layers: int) -> List[int]:
    """
    Returns the default dilation schedule of a stack of convolutions, doubling the dilation at
    each layer (1, 2, 4, ...)

    Parameters
    ----------
    layers: int
        the number of stacked layers

    Returns
    -------
    List[int]
        the dilation of each layer
    """
    return [2**i for i in range(layers)]


def receptive_field(kernel_size: int, dilations: Sequence[int]) -> int:
    """
    Returns the maximum number of events (the current one included) that can influence the
    output of a stack of truncated dilated convolutions at a given event.

    Parameters
    ----------
    kernel_size: int
        the number of (dilated) events each layer sums over
    dilations: Sequence[int]
        the dilation of each layer of the stack

    Returns
    -------
    int
        the receptive field `1 + sum_l (s - 1) * d_l`
    """
    return 1 + sum((kernel_size - 1) * d for d in dilations)


def sequence_seed(seed: int, *keys: bytes) -> np.random.SeedSequence:
    """
    Builds a seed sequence from a base seed and a set of byte keys. The result only depends on
    the content of the keys, so that the random stream associated to a sequence of events
    does not depend on its position in a dataset.

    Parameters
    ----------
    seed: int
        the base seed
    keys: bytes
        the byte strings identifying the stream

    Returns
    -------
    numpy.random.SeedSequence
        the seed sequence to be fed to `numpy.random.default_rng`
    """
    digest = hashlib.sha256()
    for key in keys:
        digest.update(key)
    words = np.frombuffer(digest.digest()[:16], dtype=np.uint32)
    return np.random.SeedSequence([int(seed)] + [int(w) for w in words])
