from typing import Dict, Optional, Sequence

import numpy as np

from cotic_toolbox.exceptions import DimensionError
from cotic_toolbox.model.kernel import KernelNetwork
from cotic_toolbox.ndarr.tensor import Operand, Tensor, as_tensor


class ContConvLayer:
    """
    Continuous causal convolution over an event sequence. The output at time `t` is the sum of
    `k(t - t_j) m_j` over the events `t_j <= t`, restricted to the `kernel_size` most recent
    events taken every `dilation` positions, starting from the last event not after `t`.

    Parameters
    ----------
    d_in: int
        the width of the event features
    d_out: int
        the width of the output features
    rng: numpy.random.Generator
        the generator used for the initialization of the kernel network
    kernel_size: Optional[int]
        the number of (dilated) events summed at each position. If set to None the sum runs
        over the whole history (default: 5)
    dilation: int
        the step between two summed events (default: 1)
    hidden: Sequence[int]
        the hidden widths of the kernel network (default: (16, 16))
    activation: str
        the activation of the kernel network, `leaky_relu` (default) or `sine`
    slope: float
        the negative slope of the kernel network leaky ReLU (default: 0.1)
    frequency: float
        the frequency of the kernel network sine activation (default: 1.0)
    """

    def __init__(
        self,
        d_in: int,
        d_out: int,
        rng: np.random.Generator,
        kernel_size: Optional[int] = 5,
        dilation: int = 1,
        hidden: Sequence[int] = (16, 16),
        activation: str = "leaky_relu",
        slope: float = 0.1,
        frequency: float = 1.0,
    ) -> None:

        if kernel_size is not None and kernel_size < 1:
            raise ValueError("The kernel size must be a positive integer.")

        if dilation < 1:
            raise ValueError("The dilation must be a positive integer.")

        self.__kernel = KernelNetwork(
            d_in, d_out, rng, hidden=hidden, activation=activation, slope=slope, frequency=frequency
        )
        self.__kernel_size = kernel_size
        self.__dilation = dilation

    @property
    def kernel(self) -> KernelNetwork:
        return self.__kernel

    @property
    def kernel_size(self) -> Optional[int]:
        return self.__kernel_size

    @property
    def dilation(self) -> int:
        return self.__dilation

    def named_parameters(self) -> Dict[str, Tensor]:
        return {f"kernel.{k}": v for k, v in self.__kernel.named_parameters().items()}

    def conv_at_queries(
        self,
        event_times: np.ndarray,
        features: Operand,
        query_times: np.ndarray,
        include_current: bool = True,
    ) -> Tensor:
        """
        Evaluates the convolution at arbitrary query times.

        Parameters
        ----------
        event_times: numpy.ndarray
            the strictly increasing times of the `n` events
        features: Operand
            the `(n, d_in)` event features
        query_times: numpy.ndarray
            the `Q` times at which the convolution is evaluated
        include_current: bool
            if True (default) an event occurring exactly at the query time is part of the sum,
            else only events strictly before the query are used

        Raises
        ------
        DimensionError
            exception raised if the features are not `(n, d_in)`

        Returns
        -------
        Tensor
            the `(Q, d_out)` convolution outputs
        """
        times = np.asarray(event_times, dtype=np.float64).reshape(-1)
        queries = np.asarray(query_times, dtype=np.float64).reshape(-1)
        features = as_tensor(features)

        n, Q = len(times), len(queries)
        d_in, d_out = self.__kernel.d_in, self.__kernel.d_out

        if features.ndim != 2 or features.shape != (n, d_in):
            raise DimensionError(
                "expected event features of shape ({}, {}), got {}".format(n, d_in, features.shape)
            )

        if n == 0 or Q == 0:
            return Tensor(np.zeros((Q, d_out)))

        side = "right" if include_current else "left"
        anchor = np.searchsorted(times, queries, side=side) - 1

        span = n if self.__kernel_size is None else self.__kernel_size
        index = anchor[:, None] - np.arange(span)[None, :] * self.__dilation
        valid = index >= 0
        safe = np.where(valid, index, 0)

        # lag -1 flags the slots outside the history, the kernel maps it to zero
        lags = np.where(valid, queries[:, None] - times[safe], -1.0)

        weights = self.__kernel(lags)
        gathered = features[safe.reshape(-1)].reshape(Q, span, d_in, 1)
        return (weights @ gathered).sum(axis=1).reshape(Q, d_out)

    def conv_at_events(self, event_times: np.ndarray, features: Operand) -> Tensor:
        """
        Evaluates the convolution at the event times themselves (each event included in its
        own output).
        """
        return self.conv_at_queries(event_times, features, event_times, include_current=True)
