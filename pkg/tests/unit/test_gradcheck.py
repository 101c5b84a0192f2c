import numpy as np
from numpy.testing import assert_array_almost_equal, assert_array_equal

from cotic_toolbox.ndarr.tensor import Tensor
from cotic_toolbox.ndarr.gradcheck import numerical_gradient, relative_error, check_gradients


# Test the numerical_gradient function on a quadratic form
def test_numerical_gradient():

    x = Tensor([1.0, -2.0, 0.5], requires_grad=True)
    gradient = numerical_gradient(lambda: (x * x).sum(), x)

    assert_array_almost_equal(gradient, [2.0, -4.0, 1.0], decimal=8)

    # The parameter must be left untouched
    assert_array_equal(x.value, [1.0, -2.0, 0.5])


# Test the relative_error function
def test_relative_error():

    assert relative_error(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0
    assert abs(relative_error(np.array([2.0]), np.array([1.0])) - 0.5) < 1e-15

    # Vanishing gradients fall back to the absolute error
    assert relative_error(np.zeros(3), np.full(3, 1e-14)) < 1e-12


# Test that check_gradients detects a wrong gradient rule
def test_check_gradients():

    x = Tensor([0.3, 0.7], requires_grad=True)
    errors = check_gradients(lambda: x.tanh().sum(), {"x": x})
    assert errors["x"] < 1e-8

    y = Tensor([0.3, 0.7], requires_grad=True)
    errors = check_gradients(lambda: (y.detach() * y).sum(), {"y": y})
    assert errors["y"] > 0.1
