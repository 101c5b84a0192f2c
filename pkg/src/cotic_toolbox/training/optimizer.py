import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from cotic_toolbox.exceptions import DimensionError, DomainError
from cotic_toolbox.ndarr.tensor import Tensor


@dataclass
class AdamState:
    """
    Moment estimates of the Adam optimizer for one parameter.

    Arguments
    ---------
    first_moment: numpy.ndarray
        the running mean of the gradient
    second_moment: numpy.ndarray
        the running mean of the squared gradient
    step: int
        the number of updates applied so far
    """

    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, shape: Tuple[int, ...]) -> "AdamState":
        return cls(np.zeros(shape), np.zeros(shape), 0)


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[np.ndarray, AdamState]:
    """
    One bias-corrected Adam update.

    Parameters
    ----------
    param: numpy.ndarray
        the current parameter value
    grad: numpy.ndarray
        the gradient of the loss with respect to the parameter
    state: AdamState
        the moment estimates of the parameter
    lr: float
        the learning rate (default: 1e-3)
    beta1: float
        the decay of the first moment (default: 0.9)
    beta2: float
        the decay of the second moment (default: 0.999)
    eps: float
        the denominator offset (default: 1e-8)

    Raises
    ------
    DimensionError
        exception raised if the shapes of parameter, gradient and moments differ
    DomainError
        exception raised if the gradient holds non-finite values

    Returns
    -------
    Tuple[numpy.ndarray, AdamState]
        the updated parameter and moment estimates
    """
    param = np.asarray(param, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)

    if not (param.shape == grad.shape == state.first_moment.shape == state.second_moment.shape):
        raise DimensionError(
            "parameter {} and gradient {} shapes differ".format(param.shape, grad.shape)
        )

    if not np.all(np.isfinite(grad)):
        raise DomainError("non-finite gradient")

    step = state.step + 1
    m = beta1 * state.first_moment + (1.0 - beta1) * grad
    v = beta2 * state.second_moment + (1.0 - beta2) * grad * grad

    m_hat = m / (1.0 - beta1**step)
    v_hat = v / (1.0 - beta2**step)

    return param - lr * m_hat / (np.sqrt(v_hat) + eps), AdamState(m, v, step)


class Adam:
    """
    Adam optimizer acting on named `Tensor` parameters. The moment estimates are created the
    first time a parameter is updated. A step whose gradients are not all finite is rejected
    as a whole: no parameter changes and a warning is issued.

    Parameters
    ----------
    lr: float
        the learning rate (default: 1e-3)
    beta1: float
        the decay of the first moment (default: 0.9)
    beta2: float
        the decay of the second moment (default: 0.999)
    eps: float
        the denominator offset (default: 1e-8)
    """

    def __init__(
        self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8
    ) -> None:
        self.__lr = lr
        self.__beta1 = beta1
        self.__beta2 = beta2
        self.__eps = eps
        self.__states: Dict[str, AdamState] = {}

    @property
    def states(self) -> Dict[str, AdamState]:
        return dict(self.__states)

    def step(self, parameters: Dict[str, Tensor]) -> bool:
        """
        Updates the given parameters with their current gradient (a missing gradient counts
        as zero).

        Returns
        -------
        bool
            False if the step was rejected because of non-finite gradients, True otherwise
        """
        grads = {
            name: np.zeros(p.shape) if p.grad is None else np.asarray(p.grad)
            for name, p in parameters.items()
        }

        invalid = [name for name, g in grads.items() if not np.all(np.isfinite(g))]
        if invalid:
            warnings.warn(
                "Adam step rejected: non-finite gradient for {}".format(", ".join(invalid)),
                RuntimeWarning,
            )
            return False

        for name, parameter in parameters.items():
            state = self.__states.get(name)
            if state is None:
                state = AdamState.zeros(parameter.shape)
            value, self.__states[name] = adam_step(
                parameter.value,
                grads[name],
                state,
                self.__lr,
                self.__beta1,
                self.__beta2,
                self.__eps,
            )
            parameter.assign(value)

        return True

    def reset(self, names: Optional[Iterable[str]] = None) -> None:
        """
        Discards the moment estimates of the given parameters (all of them if None)
        """
        if names is None:
            self.__states.clear()
            return
        for name in names:
            self.__states.pop(name, None)
