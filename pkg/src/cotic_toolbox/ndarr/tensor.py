from __future__ import annotations

from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from cotic_toolbox.exceptions import ContractError, DimensionError, DomainError

GradientRule = Callable[[np.ndarray], np.ndarray]
Operand = Union["Tensor", float, int, Sequence[Any], np.ndarray]


class Tensor:
    """
    Dense float64 array node of a define-by-run differentiation graph. Every operation applied
    to a `Tensor` returns a new `Tensor` that remembers its parents together with the rule
    mapping the gradient of the output to the gradient contribution of each parent. Calling
    `backward` on a scalar node fills the `grad` field of every reachable node that requires
    a gradient.

    The wrapped array is read-only: operations never modify their operands. Leaf parameters
    can be given a new value with `assign`, which is what the optimizer does.

    Parameters
    ----------
    value: Operand
        the content of the node, converted to a float64 numpy array (copied)
    requires_grad: bool
        if set to True the node is a differentiable leaf (a parameter)
    """

    def __init__(self, value: Operand, requires_grad: bool = False, copy: bool = True) -> None:

        array = np.array(value, dtype=np.float64) if copy else np.asarray(value, dtype=np.float64)
        array.setflags(write=False)

        self.__value: np.ndarray = array
        self.__requires_grad = requires_grad
        self._parents: Tuple[Tuple[Tensor, GradientRule], ...] = ()
        self._op = "leaf"
        self.grad: Optional[np.ndarray] = None

    def __repr__(self) -> str:
        return "Tensor(shape={}, op='{}', requires_grad={})".format(
            self.shape, self._op, self.__requires_grad
        )

    @property
    def value(self) -> np.ndarray:
        """
        The read-only numpy array held by the node
        """
        return self.__value

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.__value.shape

    @property
    def ndim(self) -> int:
        return self.__value.ndim

    @property
    def size(self) -> int:
        return int(self.__value.size)

    @property
    def requires_grad(self) -> bool:
        return self.__requires_grad

    @property
    def op(self) -> str:
        """
        The name of the operation that produced the node (`leaf` for inputs and parameters)
        """
        return self._op

    @property
    def parents(self) -> List[Tensor]:
        return [parent for parent, _ in self._parents]

    def assign(self, value: Operand) -> None:
        """
        Replaces the value of a leaf node, keeping its shape.

        Parameters
        ----------
        value: Operand
            the new value

        Raises
        ------
        ContractError
            exception raised if the node is not a leaf
        DimensionError
            exception raised if the shape of the new value differs from the current one
        """
        if self._parents:
            raise ContractError("Only leaf tensors can be assigned a new value.")

        array = np.array(value, dtype=np.float64)
        if array.shape != self.__value.shape:
            raise DimensionError(
                "cannot assign a value of shape {} to a tensor of shape {}".format(
                    array.shape, self.__value.shape
                )
            )
        array.setflags(write=False)
        self.__value = array

    def detach(self) -> Tensor:
        """
        Returns a constant node sharing the value of this node and cut from the graph
        """
        return Tensor(self.__value, copy=False)

    # Binary arithmetic
    # --------------------------------------------------------------------------------------

    def __add__(self, other: Operand) -> Tensor:
        other = as_tensor(other)
        _broadcast_shape(self, other)
        return _result(
            self.value + other.value,
            (
                (self, lambda g: _unbroadcast(g, self.shape)),
                (other, lambda g: _unbroadcast(g, other.shape)),
            ),
            "add",
        )

    def __radd__(self, other: Operand) -> Tensor:
        return as_tensor(other) + self

    def __sub__(self, other: Operand) -> Tensor:
        other = as_tensor(other)
        _broadcast_shape(self, other)
        return _result(
            self.value - other.value,
            (
                (self, lambda g: _unbroadcast(g, self.shape)),
                (other, lambda g: _unbroadcast(-g, other.shape)),
            ),
            "sub",
        )

    def __rsub__(self, other: Operand) -> Tensor:
        return as_tensor(other) - self

    def __mul__(self, other: Operand) -> Tensor:
        other = as_tensor(other)
        _broadcast_shape(self, other)
        return _result(
            self.value * other.value,
            (
                (self, lambda g: _unbroadcast(g * other.value, self.shape)),
                (other, lambda g: _unbroadcast(g * self.value, other.shape)),
            ),
            "mul",
        )

    def __rmul__(self, other: Operand) -> Tensor:
        return as_tensor(other) * self

    def __truediv__(self, other: Operand) -> Tensor:
        other = as_tensor(other)
        _broadcast_shape(self, other)
        return _result(
            self.value / other.value,
            (
                (self, lambda g: _unbroadcast(g / other.value, self.shape)),
                (
                    other,
                    lambda g: _unbroadcast(-g * self.value / other.value**2, other.shape),
                ),
            ),
            "div",
        )

    def __rtruediv__(self, other: Operand) -> Tensor:
        return as_tensor(other) / self

    def __neg__(self) -> Tensor:
        return _result(-self.value, ((self, lambda g: -g),), "neg")

    def __matmul__(self, other: Operand) -> Tensor:
        return matmul(self, other)

    # Reductions and shape manipulation
    # --------------------------------------------------------------------------------------

    def sum(self, axis: Union[None, int, Tuple[int, ...]] = None, keepdims: bool = False) -> Tensor:
        """
        Sum of the elements over the given axis (all of them if `axis` is None)
        """
        shape = self.shape

        def rule(g: np.ndarray) -> np.ndarray:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, shape)

        return _result(self.value.sum(axis=axis, keepdims=keepdims), ((self, rule),), "sum")

    def mean(self, axis: Union[None, int, Tuple[int, ...]] = None, keepdims: bool = False) -> Tensor:
        """
        Mean of the elements over the given axis (all of them if `axis` is None)
        """
        reduced = self.value.sum(axis=axis, keepdims=keepdims)
        count = self.size // max(int(np.size(reduced)), 1)
        if count == 0:
            raise ContractError("Cannot compute the mean of an empty tensor.")
        return self.sum(axis=axis, keepdims=keepdims) / float(count)

    def reshape(self, *shape: Any) -> Tensor:
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        try:
            value = self.value.reshape(shape)
        except ValueError as error:
            raise DimensionError(str(error))
        return _result(value, ((self, lambda g: g.reshape(original)),), "reshape")

    def __getitem__(self, key: Any) -> Tensor:
        shape = self.shape

        def rule(g: np.ndarray) -> np.ndarray:
            out = np.zeros(shape)
            np.add.at(out, key, g)
            return out

        return _result(self.value[key], ((self, rule),), "index")

    # Element-wise functions
    # --------------------------------------------------------------------------------------

    def leaky_relu(self, slope: float = 0.01) -> Tensor:
        x = self.value
        positive = x >= 0
        return _result(
            np.where(positive, x, slope * x),
            ((self, lambda g: g * np.where(positive, 1.0, slope)),),
            "leaky_relu",
        )

    def softplus(self) -> Tensor:
        # x + log(1 + e^-x) for x > 0, log(1 + e^x) otherwise
        x = self.value
        value = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
        return _result(value, ((self, lambda g: g * expit(x)),), "softplus")

    def tanh(self) -> Tensor:
        y = np.tanh(self.value)
        return _result(y, ((self, lambda g: g * (1.0 - y * y)),), "tanh")

    def sine(self, frequency: float = 1.0) -> Tensor:
        x = self.value
        return _result(
            np.sin(frequency * x),
            ((self, lambda g: g * frequency * np.cos(frequency * x)),),
            "sine",
        )

    def exp(self) -> Tensor:
        # overflows to +inf past ~709
        with np.errstate(over="ignore"):
            y = np.exp(self.value)
        return _result(y, ((self, lambda g: g * y),), "exp")

    def log(self) -> Tensor:
        x = self.value
        if np.any(x <= 0):
            raise DomainError("log of a non-positive value")
        return _result(np.log(x), ((self, lambda g: g / x),), "log")

    def clamp_min(self, floor: float) -> Tensor:
        x = self.value
        kept = x >= floor
        return _result(np.maximum(x, floor), ((self, lambda g: g * kept),), "clamp_min")

    def logcosh(self) -> Tensor:
        # x + log(1 + e^(-2x)) evaluated on |x|, which is the same function
        x = self.value
        a = np.abs(x)
        value = a + np.log1p(np.exp(-2.0 * a))
        return _result(value, ((self, lambda g: g * np.tanh(x)),), "logcosh")


def as_tensor(value: Operand) -> Tensor:
    """
    Returns `value` if it is already a `Tensor`, else wraps it in a constant node
    """
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _result(
    value: np.ndarray, parents: Sequence[Tuple[Tensor, GradientRule]], op: str
) -> Tensor:
    """
    Builds the output node of an operation, keeping only the parents that require a gradient
    """
    kept = tuple((parent, rule) for parent, rule in parents if parent.requires_grad)
    out = Tensor(value, requires_grad=bool(kept), copy=False)
    out._parents = kept
    out._op = op
    return out


def _broadcast_shape(a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return tuple(np.broadcast_shapes(a.shape, b.shape))
    except ValueError:
        raise DimensionError("cannot broadcast shapes {} and {}".format(a.shape, b.shape))


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """
    Sums a broadcast gradient back to the shape of the operand it belongs to
    """
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def matmul(a: Operand, b: Operand) -> Tensor:
    """
    Matrix product of two tensors with at least two dimensions. Leading dimensions are
    broadcast as in `numpy.matmul`.

    Parameters
    ----------
    a: Operand
        left operand of shape (..., n, k)
    b: Operand
        right operand of shape (..., k, m)

    Raises
    ------
    DimensionError
        exception raised if the inner extents do not agree or the leading extents cannot be
        broadcast

    Returns
    -------
    Tensor
        the product of shape (..., n, m)
    """
    a, b = as_tensor(a), as_tensor(b)

    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError("matmul operands must have at least two dimensions")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(
            "inner extents of {} and {} do not agree".format(a.shape, b.shape)
        )

    try:
        value = np.matmul(a.value, b.value)
    except ValueError as error:
        raise DimensionError(str(error))

    return _result(
        value,
        (
            (a, lambda g: _unbroadcast(np.matmul(g, np.swapaxes(b.value, -1, -2)), a.shape)),
            (b, lambda g: _unbroadcast(np.matmul(np.swapaxes(a.value, -1, -2), g), b.shape)),
        ),
        "matmul",
    )


_UNARY: Dict[str, Callable[..., Tensor]] = {
    "leaky_relu": lambda x, slope=0.01, **_: x.leaky_relu(slope),
    "softplus": lambda x, **_: x.softplus(),
    "tanh": lambda x, **_: x.tanh(),
    "sine": lambda x, frequency=1.0, **_: x.sine(frequency),
    "exp": lambda x, **_: x.exp(),
    "log": lambda x, **_: x.log(),
    "logcosh": lambda x, **_: x.logcosh(),
}


def elementwise(op: str, *inputs: Operand, **options: float) -> Tensor:
    """
    Applies a point-wise operation identified by its tag.

    Parameters
    ----------
    op: str
        one of `add`, `mul` (two inputs, broadcast) or `leaky_relu`, `softplus`, `tanh`,
        `sine`, `exp`, `log`, `logcosh` (one input)
    inputs: Operand
        the operands
    options: float
        `slope` for `leaky_relu` (default 0.01), `frequency` for `sine` (default 1.0)

    Raises
    ------
    ValueError
        exception raised if the tag is unknown or the number of inputs is wrong
    DimensionError
        exception raised if the operands cannot be broadcast
    DomainError
        exception raised by `log` on non-positive input

    Returns
    -------
    Tensor
        the result of the operation
    """
    tensors = [as_tensor(x) for x in inputs]

    if op in ("add", "mul"):
        if len(tensors) != 2:
            raise ValueError(f"'{op}' requires exactly two inputs")
        return tensors[0] + tensors[1] if op == "add" else tensors[0] * tensors[1]

    if op not in _UNARY:
        raise ValueError(f"'{op}' is not a valid element-wise operation")
    if len(tensors) != 1:
        raise ValueError(f"'{op}' requires exactly one input")

    return _UNARY[op](tensors[0], **options)


def _topological_order(root: Tensor) -> List[Tensor]:
    """
    Returns the nodes reachable from `root` with every node listed after all its parents
    """
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]

    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent, _ in reversed(node._parents):
            if id(parent) not in visited:
                stack.append((parent, False))

    return order


def backward(root: Tensor) -> None:
    """
    Reverse-mode differentiation: fills the `grad` field of every node reachable from `root`
    with the partial derivative of `root` with respect to that node. Gradients of reachable
    nodes are overwritten, not accumulated across calls.

    Parameters
    ----------
    root: Tensor
        the scalar-shaped node to differentiate

    Raises
    ------
    ContractError
        exception raised if `root` holds more than one element
    """
    if root.size != 1:
        raise ContractError(
            "backward requires a scalar root, got a tensor of shape {}".format(root.shape)
        )

    order = _topological_order(root)
    for node in order:
        node.grad = None

    root.grad = np.ones(root.shape)
    for node in reversed(order):
        if node.grad is None:
            continue
        for parent, rule in node._parents:
            contribution = rule(node.grad)
            parent.grad = contribution if parent.grad is None else parent.grad + contribution
