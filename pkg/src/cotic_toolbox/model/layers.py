from typing import Dict, List, Sequence

import numpy as np

from cotic_toolbox.exceptions import DimensionError, DomainError
from cotic_toolbox.ndarr.tensor import Operand, Tensor, as_tensor

ACTIVATIONS = ("leaky_relu", "sine")


def activate(x: Tensor, activation: str, slope: float = 0.01, frequency: float = 1.0) -> Tensor:
    """
    Applies a named non-linearity: `leaky_relu` (with negative `slope`) or `sine` (`sin(frequency * x)`)
    """
    if activation == "leaky_relu":
        return x.leaky_relu(slope)
    elif activation == "sine":
        return x.sine(frequency)
    raise ValueError(f"'{activation}' is not a valid activation, use one of {ACTIVATIONS}")


class Linear:
    """
    Affine map `x @ W + b` acting on the last axis of its input. Weights and bias are drawn
    uniformly in `[-1/sqrt(d_in), 1/sqrt(d_in)]`.

    Parameters
    ----------
    d_in: int
        the input width
    d_out: int
        the output width
    rng: numpy.random.Generator
        the generator used for the initialization
    bias: bool
        if set to False the map is linear (default: True)
    """

    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True) -> None:

        if d_in < 1 or d_out < 1:
            raise ValueError("The widths of a linear layer must be positive integers.")

        bound = 1.0 / np.sqrt(d_in)
        self.__weight = Tensor(rng.uniform(-bound, bound, (d_in, d_out)), requires_grad=True)
        self.__bias = (
            Tensor(rng.uniform(-bound, bound, (d_out,)), requires_grad=True) if bias else None
        )

    def __call__(self, x: Operand) -> Tensor:
        x = as_tensor(x)
        if x.shape[-1] != self.__weight.shape[0]:
            raise DimensionError(
                "expected inputs of width {}, got {}".format(self.__weight.shape[0], x.shape[-1])
            )
        y = x @ self.__weight
        return y if self.__bias is None else y + self.__bias

    @property
    def weight(self) -> Tensor:
        return self.__weight

    @property
    def bias(self) -> Tensor:
        return self.__bias

    def named_parameters(self) -> Dict[str, Tensor]:
        parameters = {"weight": self.__weight}
        if self.__bias is not None:
            parameters["bias"] = self.__bias
        return parameters


class MLP:
    """
    Feed-forward network: a stack of `Linear` layers with a point-wise activation between
    consecutive layers (none after the last one).

    Parameters
    ----------
    widths: Sequence[int]
        the widths of the network, input and output included (at least two entries)
    rng: numpy.random.Generator
        the generator used for the initialization
    activation: str
        `leaky_relu` (default) or `sine`
    slope: float
        the negative slope of the leaky ReLU (default: 0.01)
    frequency: float
        the frequency of the sine activation (default: 1.0)
    """

    def __init__(
        self,
        widths: Sequence[int],
        rng: np.random.Generator,
        activation: str = "leaky_relu",
        slope: float = 0.01,
        frequency: float = 1.0,
    ) -> None:

        if len(widths) < 2:
            raise ValueError("An MLP requires at least an input and an output width.")

        if activation not in ACTIVATIONS:
            raise ValueError(f"'{activation}' is not a valid activation, use one of {ACTIVATIONS}")

        self.__layers = [Linear(a, b, rng) for a, b in zip(widths[:-1], widths[1:])]
        self.__activation = activation
        self.__slope = slope
        self.__frequency = frequency

    def __call__(self, x: Operand) -> Tensor:
        x = as_tensor(x)
        for index, layer in enumerate(self.__layers):
            x = layer(x)
            if index < len(self.__layers) - 1:
                x = activate(x, self.__activation, self.__slope, self.__frequency)
        return x

    @property
    def layers(self) -> List[Linear]:
        return list(self.__layers)

    def named_parameters(self) -> Dict[str, Tensor]:
        return {
            f"{index}.{name}": p
            for index, layer in enumerate(self.__layers)
            for name, p in layer.named_parameters().items()
        }


class Embedding:
    """
    Lookup table mapping the event types `1..K` to learned `dim`-dimensional vectors, with
    entries initialized from a standard normal distribution.

    Parameters
    ----------
    num_types: int
        the number of event types K
    dim: int
        the embedding width
    rng: numpy.random.Generator
        the generator used for the initialization
    """

    def __init__(self, num_types: int, dim: int, rng: np.random.Generator) -> None:
        self.__table = Tensor(rng.standard_normal((num_types, dim)), requires_grad=True)

    def __call__(self, marks: Sequence[int]) -> Tensor:
        index = np.asarray(marks, dtype=np.int64).reshape(-1)
        K = self.__table.shape[0]
        if index.size > 0 and (index.min() < 1 or index.max() > K):
            raise DomainError(f"event types must lie in [1, {K}]")
        return self.__table[index - 1]

    @property
    def table(self) -> Tensor:
        return self.__table

    def named_parameters(self) -> Dict[str, Tensor]:
        return {"table": self.__table}
