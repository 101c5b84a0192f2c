from typing import Dict, Sequence, Union

import numpy as np

from cotic_toolbox.model.layers import MLP
from cotic_toolbox.ndarr.tensor import Tensor


class KernelNetwork:
    """
    Continuous convolution kernel: a feed-forward network mapping a scalar time lag to a
    `d_out x d_in` weight matrix. The kernel is causal, the matrix returned for a negative lag
    is exactly zero whatever the parameters are.

    Parameters
    ----------
    d_in: int
        the number of input channels of the convolution
    d_out: int
        the number of output channels of the convolution
    rng: numpy.random.Generator
        the generator used for the initialization
    hidden: Sequence[int]
        the widths of the hidden layers (default: (16, 16))
    activation: str
        the hidden non-linearity, `leaky_relu` (default) or `sine`
    slope: float
        the negative slope of the leaky ReLU (default: 0.1)
    frequency: float
        the frequency of the sine activation (default: 1.0)
    """

    def __init__(
        self,
        d_in: int,
        d_out: int,
        rng: np.random.Generator,
        hidden: Sequence[int] = (16, 16),
        activation: str = "leaky_relu",
        slope: float = 0.1,
        frequency: float = 1.0,
    ) -> None:

        self.__d_in = d_in
        self.__d_out = d_out
        self.__network = MLP(
            [1, *hidden, d_out * d_in], rng, activation=activation, slope=slope, frequency=frequency
        )

    def __call__(self, lags: Union[float, np.ndarray]) -> Tensor:
        lags = np.asarray(lags, dtype=np.float64)
        flat = lags.reshape(-1, 1)
        causal = flat >= 0

        weights = self.__network(np.where(causal, flat, 0.0)) * causal.astype(np.float64)
        return weights.reshape(lags.shape + (self.__d_out, self.__d_in))

    @property
    def d_in(self) -> int:
        return self.__d_in

    @property
    def d_out(self) -> int:
        return self.__d_out

    def named_parameters(self) -> Dict[str, Tensor]:
        return self.__network.named_parameters()


def kernel_eval(kernel: KernelNetwork, lags: Union[float, Sequence[float], np.ndarray]) -> Tensor:
    """
    Evaluates a kernel network on a set of time lags.

    Parameters
    ----------
    kernel: KernelNetwork
        the kernel to evaluate
    lags: Union[float, Sequence[float], numpy.ndarray]
        the time lags, of any shape

    Returns
    -------
    Tensor
        the kernel matrices, of shape `lags.shape + (d_out, d_in)`. Entries associated to
        negative lags are exactly zero.
    """
    return kernel(np.asarray(lags, dtype=np.float64))
