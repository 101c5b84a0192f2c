import numpy as np
from numpy.testing import assert_array_almost_equal, assert_array_equal

from cotic_toolbox.model.kernel import KernelNetwork, kernel_eval
from cotic_toolbox.model.conv import ContConvLayer
from cotic_toolbox.ndarr.tensor import Tensor
from cotic_toolbox.ndarr.gradcheck import check_gradients
from cotic_toolbox.exceptions import DimensionError


def events(n, seed=0):
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.uniform(0.05, 0.3, n))


# TESTING THE KERNEL NETWORK
# ------------------------------------------------------------------------------------------

# Test the shape of the kernel output and its causal mask
def test_kernel_eval():

    kernel = KernelNetwork(3, 2, np.random.default_rng(0))

    weights = kernel_eval(kernel, [0.0, 0.4, 1.2])
    assert weights.shape == (3, 2, 3)

    assert kernel_eval(kernel, 0.7).shape == (2, 3)
    assert_array_equal(kernel_eval(kernel, -0.5).value, np.zeros((2, 3)))

    lags = np.array([[-1.0, 0.3], [-1e-9, 2.0]])
    weights = kernel_eval(kernel, lags).value
    assert weights.shape == (2, 2, 2, 3)
    assert np.all(weights[0, 0] == 0.0)
    assert np.all(weights[1, 0] == 0.0)


# Test the kernel network on a hand evaluated 1-1-1 network
def test_kernel_eval_hand_oracle():

    kernel = KernelNetwork(1, 1, np.random.default_rng(0), hidden=(1,), slope=0.01)
    parameters = kernel.named_parameters()
    parameters["0.weight"].assign([[2.0]])
    parameters["0.bias"].assign([0.0])
    parameters["1.weight"].assign([[3.0]])
    parameters["1.bias"].assign([0.0])

    assert abs(float(kernel_eval(kernel, 0.5).value[0, 0]) - 3.0) < 1e-15

    # A negative pre-activation goes through the leaky slope
    parameters["0.weight"].assign([[-2.0]])
    assert abs(float(kernel_eval(kernel, 0.5).value[0, 0]) + 0.03) < 1e-15


# Test that a network with all parameters at zero gives a zero kernel
def test_kernel_eval_zero_network():

    kernel = KernelNetwork(2, 2, np.random.default_rng(1), activation="sine")
    for parameter in kernel.named_parameters().values():
        parameter.assign(np.zeros(parameter.shape))

    assert_array_equal(kernel_eval(kernel, [0.0, 0.5, 3.0]).value, np.zeros((3, 2, 2)))


# TESTING THE CONTCONVLAYER CLASS
# ------------------------------------------------------------------------------------------

# Test the empty sum cases of the convolution
def test_ContConvLayer_empty():

    layer = ContConvLayer(2, 3, np.random.default_rng(0))

    y = layer.conv_at_queries(np.zeros(0), np.zeros((0, 2)), np.array([0.0, 0.5]))
    assert_array_equal(y.value, np.zeros((2, 3)))

    times = np.array([0.4, 0.6])
    features = np.ones((2, 2))
    y = layer.conv_at_queries(times, features, np.array([0.1, 0.3]))
    assert_array_equal(y.value, np.zeros((2, 3)))

    # Strict history: the first event does not see itself
    y = layer.conv_at_queries(times, features, times, include_current=False)
    assert_array_equal(y.value[0], np.zeros(3))


# Test the convolution at a single event, equal to k(0) m
def test_ContConvLayer_single_event():

    layer = ContConvLayer(2, 3, np.random.default_rng(2))
    features = np.array([[0.5, -1.0]])

    y = layer.conv_at_events(np.array([0.3]), features)
    expected = layer.kernel(0.0).value @ features[0]

    assert y.shape == (1, 3)
    assert_array_almost_equal(y.value[0], expected, decimal=14)


# Test the truncated convolution against a naive sum
def test_ContConvLayer_naive_oracle():

    rng = np.random.default_rng(3)
    layer = ContConvLayer(2, 2, rng, kernel_size=2, dilation=1, hidden=(4,))
    times = np.array([0.1, 0.35, 0.5])
    features = rng.normal(size=(3, 2))

    y = layer.conv_at_events(times, features).value
    k = lambda lag: layer.kernel(lag).value
    expected = k(0.0) @ features[2] + k(times[2] - times[1]) @ features[1]

    assert y.shape == (3, 2)
    assert_array_almost_equal(y[2], expected, decimal=14)

    # Dilation 2 skips the middle event
    dilated = ContConvLayer(2, 2, np.random.default_rng(3), kernel_size=2, dilation=2, hidden=(4,))
    k = lambda lag: dilated.kernel(lag).value
    expected = k(0.0) @ features[2] + k(times[2] - times[0]) @ features[0]
    assert_array_almost_equal(dilated.conv_at_events(times, features).value[2], expected, decimal=14)


# Test that an untruncated convolution equals a convolution of size the sequence length
def test_ContConvLayer_untruncated():

    times = events(10, seed=4)
    features = np.random.default_rng(5).normal(size=(10, 3))

    full = ContConvLayer(3, 2, np.random.default_rng(6), kernel_size=None)
    sized = ContConvLayer(3, 2, np.random.default_rng(6), kernel_size=10)

    assert_array_equal(full.conv_at_events(times, features).value, sized.conv_at_events(times, features).value)


# Test the causality and the truncation of the convolution by perturbation
def test_ContConvLayer_perturbation():

    rng = np.random.default_rng(7)
    layer = ContConvLayer(2, 2, rng, kernel_size=3, dilation=2, hidden=(8,))

    for _ in range(20):
        times = events(12, seed=int(rng.integers(1000)))
        features = rng.normal(size=(12, 2))
        base = layer.conv_at_events(times, features).value

        i = int(rng.integers(0, 12))
        j = int(rng.integers(0, 12))
        changed = features.copy()
        changed[j] += rng.normal(size=2)
        after = layer.conv_at_events(times, changed).value

        if j not in (i, i - 2, i - 4):
            assert_array_equal(base[i], after[i])

        # Queries before a perturbed event are unchanged
        queries = np.linspace(0.0, times[j] - 1e-6, 7)
        assert_array_equal(
            layer.conv_at_queries(times, features, queries).value,
            layer.conv_at_queries(times, changed, queries).value,
        )


# Test the gradients of the convolution with respect to the kernel parameters
def test_ContConvLayer_gradients():

    rng = np.random.default_rng(8)
    layer = ContConvLayer(2, 2, rng, kernel_size=3, hidden=(5,), activation="sine")
    times = events(6, seed=9)
    features = Tensor(rng.normal(size=(6, 2)), requires_grad=True)
    weights = rng.normal(size=(6, 2))

    parameters = dict(layer.named_parameters())
    parameters["features"] = features

    errors = check_gradients(lambda: (layer.conv_at_events(times, features) * weights).sum(), parameters)
    for name, error in errors.items():
        assert error < 1e-4, f"gradient mismatch on {name}"


# Test the ContConvLayer failures
def test_ContConvLayer_fail():

    layer = ContConvLayer(2, 3, np.random.default_rng(0))

    try:
        layer.conv_at_events(np.array([0.1, 0.2]), np.ones((2, 4)))
    except DimensionError:
        assert True
    else:
        assert False, "An expected DimensionError exception was not raised by 'conv_at_events'"

    for options in [{"kernel_size": 0}, {"dilation": 0}]:
        try:
            ContConvLayer(2, 3, np.random.default_rng(0), **options)
        except ValueError:
            assert True
        else:
            assert False, "An expected ValueError exception was not raised during 'ContConvLayer' construction"
