from typing import Callable, Dict

import numpy as np

from cotic_toolbox.ndarr.tensor import Tensor, backward


def numerical_gradient(
    function: Callable[[], Tensor], parameter: Tensor, step: float = 1e-5
) -> np.ndarray:
    """
    Central finite-difference estimate of the gradient of a scalar function with respect to a
    leaf parameter. The parameter is restored to its original value on exit.

    Parameters
    ----------
    function: Callable[[], Tensor]
        closure rebuilding the graph and returning the scalar root
    parameter: Tensor
        the leaf whose entries are perturbed
    step: float
        the perturbation applied to each entry (default: 1e-5)

    Returns
    -------
    numpy.ndarray
        the estimated gradient, with the shape of the parameter
    """
    base = parameter.value.copy()
    gradient = np.zeros_like(base)

    try:
        for index in np.ndindex(*base.shape):
            shifted = base.copy()
            shifted[index] += step
            parameter.assign(shifted)
            plus = float(function().value)

            shifted[index] -= 2.0 * step
            parameter.assign(shifted)
            minus = float(function().value)

            gradient[index] = (plus - minus) / (2.0 * step)
    finally:
        parameter.assign(base)

    return gradient


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """
    Norm-wise relative error `|a - n| / max(|a|, |n|)`. When both gradients vanish the absolute
    error is returned instead.
    """
    difference = float(np.linalg.norm(np.ravel(analytic - numeric)))
    scale = max(float(np.linalg.norm(np.ravel(analytic))), float(np.linalg.norm(np.ravel(numeric))))
    if scale < 1e-12:
        return difference
    return difference / scale


def check_gradients(
    function: Callable[[], Tensor], parameters: Dict[str, Tensor], step: float = 1e-5
) -> Dict[str, float]:
    """
    Compares the reverse-mode gradient of a scalar function with central finite differences
    for every parameter of a dictionary.

    Parameters
    ----------
    function: Callable[[], Tensor]
        closure rebuilding the graph and returning the scalar root. It must be deterministic
        (e.g. by re-seeding any random generator it uses).
    parameters: Dict[str, Tensor]
        the parameters to check, by name
    step: float
        the finite-difference step (default: 1e-5)

    Returns
    -------
    Dict[str, float]
        the relative error of each parameter gradient
    """
    for parameter in parameters.values():
        parameter.grad = None

    backward(function())
    analytic = {
        name: np.zeros(p.shape) if p.grad is None else np.array(p.grad)
        for name, p in parameters.items()
    }

    return {
        name: relative_error(analytic[name], numerical_gradient(function, p, step))
        for name, p in parameters.items()
    }
