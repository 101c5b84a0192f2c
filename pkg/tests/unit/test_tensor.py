import numpy as np
import pytest
from numpy.testing import assert_array_almost_equal, assert_almost_equal, assert_array_equal

from cotic_toolbox.ndarr.tensor import Tensor, matmul, elementwise, backward
from cotic_toolbox.ndarr.gradcheck import check_gradients
from cotic_toolbox.exceptions import DimensionError, DomainError, ContractError


# TESTING THE MATMUL FUNCTION
# ------------------------------------------------------------------------------------------

# Test the matmul function on hand computed examples
def test_matmul():

    identity = np.eye(2)
    matrix = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert_array_equal(matmul(identity, matrix).value, matrix)

    result = matmul([[1.0, 2.0]], [[3.0], [4.0]])
    assert result.shape == (1, 1)
    assert_almost_equal(result.value[0, 0], 11.0, decimal=12)


# Test the matmul function against a naive triple loop
def test_matmul_naive_oracle():

    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 2))

    expected = np.zeros((3, 2))
    for i in range(3):
        for j in range(2):
            for k in range(4):
                expected[i, j] += a[i, k] * b[k, j]

    assert_array_almost_equal(matmul(a, b).value, expected, decimal=12)


# Test the matmul function failures
def test_matmul_fail():

    # Test the case of inner extents mismatch
    try:
        matmul(np.ones((2, 3)), np.ones((2, 3)))
    except DimensionError:
        assert True
    else:
        assert False, "An expected DimensionError exception was not raised by 'matmul'"

    # Test the case of a one dimensional operand
    try:
        matmul(np.ones(3), np.ones((3, 1)))
    except DimensionError:
        assert True
    else:
        assert False, "An expected DimensionError exception was not raised by 'matmul'"


# TESTING THE ELEMENT-WISE OPERATIONS
# ------------------------------------------------------------------------------------------

# Test the element-wise operations on the documented examples
def test_elementwise():

    assert_almost_equal(elementwise("leaky_relu", -1.0, slope=0.01).value, -0.01, decimal=15)
    assert_almost_equal(elementwise("softplus", 0.0).value, np.log(2.0), decimal=15)
    assert abs(float(elementwise("softplus", 50.0).value) - 50.0) < 1e-9
    assert_almost_equal(elementwise("add", 1.0, 2.0).value, 3.0)
    assert_almost_equal(elementwise("mul", 3.0, 2.0).value, 6.0)
    assert_almost_equal(elementwise("sine", np.pi / 2.0).value, 1.0)
    assert_almost_equal(elementwise("sine", np.pi / 4.0, frequency=2.0).value, 1.0)
    assert_almost_equal(elementwise("exp", 0.0).value, 1.0)
    assert_almost_equal(elementwise("tanh", 0.0).value, 0.0)
    assert_almost_equal(elementwise("log", np.e).value, 1.0)


# Test the softplus guard on large inputs
def test_softplus_large_values():

    x = Tensor([100.0, 800.0, -800.0])
    y = x.softplus().value
    assert np.all(np.isfinite(y))
    assert_array_almost_equal(y, [100.0, 800.0, 0.0], decimal=12)


# Test the element-wise operations failures
def test_elementwise_fail():

    # Test the case of the logarithm of a non-positive value
    try:
        elementwise("log", [1.0, 0.0])
    except DomainError:
        assert True
    else:
        assert False, "An expected DomainError exception was not raised by 'log'"

    # Test the case of an unknown operation
    try:
        elementwise("cosh", 1.0)
    except ValueError:
        assert True
    else:
        assert False, "An expected ValueError exception was not raised by 'elementwise'"

    # Test the case of incompatible shapes
    try:
        elementwise("add", np.ones(3), np.ones(2))
    except DimensionError:
        assert True
    else:
        assert False, "An expected DimensionError exception was not raised by 'elementwise'"


# Test that broadcasting follows the numpy rules
def test_broadcasting():

    a = Tensor(np.ones((2, 3)), requires_grad=True)
    b = Tensor(np.arange(3.0), requires_grad=True)
    backward((a * b).sum())

    assert_array_equal(a.grad, np.tile(np.arange(3.0), (2, 1)))
    assert_array_equal(b.grad, [2.0, 2.0, 2.0])


# TESTING THE BACKWARD FUNCTION
# ------------------------------------------------------------------------------------------

# Test the backward function on analytic examples
def test_backward():

    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    backward((x * x).sum())
    assert_array_almost_equal(x.grad, [2.0, 4.0, 6.0], decimal=15)

    w = Tensor(0.0, requires_grad=True)
    backward((w * 1.0).softplus())
    assert_almost_equal(w.grad, 0.5, decimal=15)


# Test the backward function failure on a non scalar root
def test_backward_fail():

    x = Tensor([1.0, 2.0], requires_grad=True)
    try:
        backward(x * 2.0)
    except ContractError:
        assert True
    else:
        assert False, "An expected ContractError exception was not raised by 'backward'"


# Test that two backward passes on identical graphs give bit-identical gradients
def test_backward_determinism():

    rng = np.random.default_rng(3)
    w_value, x_value = rng.normal(size=(4, 3)), rng.normal(size=(5, 4))

    gradients = []
    for _ in range(2):
        w = Tensor(w_value, requires_grad=True)
        backward(matmul(x_value, w).tanh().softplus().sum())
        gradients.append(w.grad.copy())

    assert_array_equal(gradients[0], gradients[1])


# Test that a node used twice accumulates both contributions
def test_backward_shared_node():

    x = Tensor(3.0, requires_grad=True)
    y = x * x + x
    backward(y)
    assert_almost_equal(x.grad, 7.0, decimal=15)


# Test the gradient of every differentiable operation against finite differences
@pytest.mark.parametrize(
    "op",
    [
        lambda x: x.leaky_relu(0.1),
        lambda x: x.softplus(),
        lambda x: x.tanh(),
        lambda x: x.sine(3.0),
        lambda x: x.exp(),
        lambda x: (x * x + 1.0).log(),
        lambda x: x.logcosh(),
        lambda x: x.clamp_min(-5.0),
        lambda x: x / (x * x + 2.0),
        lambda x: 1.0 - x,
        lambda x: -x,
        lambda x: x.mean(axis=0),
        lambda x: x.reshape(6, 2),
        lambda x: x[np.array([0, 0, 2])],
        lambda x: x[:, 1:3],
        lambda x: x.sum(axis=1, keepdims=True),
    ],
)
def test_gradients_finite_differences(op):

    rng = np.random.default_rng(7)
    x = Tensor(rng.uniform(-2.0, 2.0, size=(3, 4)), requires_grad=True)
    weights = rng.normal(size=op(x).shape)

    errors = check_gradients(lambda: (op(x) * weights).sum(), {"x": x})
    assert errors["x"] < 1e-4


# Test the gradient of a two-layer composition against finite differences
def test_gradients_two_layers():

    rng = np.random.default_rng(11)
    w1 = Tensor(rng.uniform(-2.0, 2.0, size=(4, 6)), requires_grad=True)
    w2 = Tensor(rng.uniform(-2.0, 2.0, size=(6, 1)), requires_grad=True)
    x = rng.uniform(-2.0, 2.0, size=(5, 4))

    errors = check_gradients(lambda: (matmul(x, w1).tanh() @ w2).softplus().sum(), {"w1": w1, "w2": w2})
    for error in errors.values():
        assert error < 1e-4


# Test the gradients against an independent automatic differentiation engine
def test_gradients_reference_engine():

    tf = pytest.importorskip("tensorflow")

    rng = np.random.default_rng(5)
    w_value, x_value = rng.normal(size=(3, 2)), rng.normal(size=(4, 3))

    w = Tensor(w_value, requires_grad=True)
    backward(matmul(x_value, w).softplus().logcosh().sum())

    w_ref = tf.Variable(w_value, dtype=tf.float64)
    with tf.GradientTape() as tape:
        z = tf.nn.softplus(tf.matmul(tf.constant(x_value), w_ref))
        loss = tf.reduce_sum(tf.math.log(tf.math.cosh(z)))

    assert_array_almost_equal(w.grad, tape.gradient(loss, w_ref).numpy(), decimal=10)


# TESTING THE TENSOR CLASS
# ------------------------------------------------------------------------------------------

# Test that the wrapped array cannot be modified in place
def test_Tensor_read_only():

    x = Tensor([1.0, 2.0])
    try:
        x.value[0] = 5.0
    except ValueError:
        assert True
    else:
        assert False, "The value of a Tensor was modified in place"


# Test the assign method
def test_Tensor_assign():

    x = Tensor([1.0, 2.0], requires_grad=True)
    x.assign([3.0, 4.0])
    assert_array_equal(x.value, [3.0, 4.0])

    # Test the case of a shape change
    try:
        x.assign([1.0, 2.0, 3.0])
    except DimensionError:
        assert True
    else:
        assert False, "An expected DimensionError exception was not raised by 'assign'"

    # Test the case of a non-leaf node
    try:
        (x * 2.0).assign([0.0, 0.0])
    except ContractError:
        assert True
    else:
        assert False, "An expected ContractError exception was not raised by 'assign'"


# Test that detach stops the gradient
def test_Tensor_detach():

    x = Tensor(2.0, requires_grad=True)
    y = Tensor(1.0, requires_grad=True)
    backward(x.detach() * x + y)
    assert_almost_equal(x.grad, 2.0)


# Test that reshape rejects incompatible sizes
def test_Tensor_reshape_fail():

    try:
        Tensor(np.ones(6)).reshape(4, 2)
    except DimensionError:
        assert True
    else:
        assert False, "An expected DimensionError exception was not raised by 'reshape'"
