"""
Taped primitives

Each function computes a forward value with numpy, records it on the tape of
its Node operands and supplies the analytical backward rule. Row-wise
primitives (softmax, l2_normalize, layer_norm, straight_through) act on the
last axis, so a single vector and a batch of vectors are handled alike.
"""

from typing import Optional, Tuple, Union

import numpy as np

from loster.errors import InvalidArgumentError, NormalizationError, ShapeError
from loster.numcore.tape import GradientTape, Node

Operand = Union[Node, np.ndarray, float, int]

LAYER_NORM_EPS = 1e-5


def _tape_of(*operands: Operand) -> GradientTape:
    for operand in operands:
        if isinstance(operand, Node):
            return operand.tape
    raise ShapeError("at least one operand must be a taped node")


def _lift(tape: GradientTape, operand: Operand) -> Node:
    if isinstance(operand, Node):
        return operand
    return tape.constant(np.asarray(operand, dtype=np.float64))


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to an operand's shape"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def one_hot_rows(values: np.ndarray) -> np.ndarray:
    """
    One-hot encode the argmax of every row, ties to the lowest index

    Parameters:
        values (np.ndarray): Array whose last axis holds the scores

    Returns:
        np.ndarray: Array of the same shape with a single 1 per row
    """
    hard = np.zeros_like(values, dtype=np.float64)
    winners = np.argmax(values, axis=-1)
    np.put_along_axis(hard, winners[..., np.newaxis], 1.0, axis=-1)
    return hard


def add(a: Operand, b: Operand) -> Node:
    tape = _tape_of(a, b)
    a, b = _lift(tape, a), _lift(tape, b)
    return tape.record(
        "add",
        a.value + b.value,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: Operand, b: Operand) -> Node:
    tape = _tape_of(a, b)
    a, b = _lift(tape, a), _lift(tape, b)
    return tape.record(
        "sub",
        a.value - b.value,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: Operand, b: Operand) -> Node:
    """Elementwise product with numpy broadcasting"""
    tape = _tape_of(a, b)
    a, b = _lift(tape, a), _lift(tape, b)
    return tape.record(
        "mul",
        a.value * b.value,
        (a, b),
        lambda g: (
            _unbroadcast(g * b.value, a.shape),
            _unbroadcast(g * a.value, b.shape),
        ),
    )


def scale(a: Node, factor: float) -> Node:
    factor = float(factor)
    return a.tape.record("scale", a.value * factor, (a,), lambda g: (g * factor,))


def neg(a: Node) -> Node:
    return scale(a, -1.0)


def matmul(a: Operand, b: Operand) -> Node:
    """
    Matrix product of two 2-D operands

    Raises:
        ShapeError: If inner dimensions disagree
    """
    tape = _tape_of(a, b)
    a, b = _lift(tape, a), _lift(tape, b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return tape.record(
        "matmul",
        a.value @ b.value,
        (a, b),
        lambda g: (g @ b.value.T, a.value.T @ g),
    )


def transpose(a: Node) -> Node:
    return a.tape.record("transpose", a.value.T.copy(), (a,), lambda g: (g.T,))


def linear_forward(x: Node, weight: Node, bias: Node) -> Node:
    """
    Affine map applied to every row: x @ W + b

    Parameters:
        x (Node): Input of shape (n, a) or (a,)
        weight (Node): Weights of shape (a, b)
        bias (Node): Bias of shape (b,)

    Returns:
        Node: Output of shape (n, b) or (b,)

    Raises:
        ShapeError: If dimensions disagree
    """
    if weight.ndim != 2 or x.shape[-1] != weight.shape[0]:
        raise ShapeError(
            f"linear: input {x.shape} does not match weight {weight.shape}"
        )
    if bias.shape != (weight.shape[1],):
        raise ShapeError(
            f"linear: bias {bias.shape} does not match weight {weight.shape}"
        )
    x_rows = np.atleast_2d(x.value)

    def backward(g: np.ndarray):
        g_rows = g.reshape(-1, weight.shape[1])
        return (
            (g_rows @ weight.value.T).reshape(x.shape),
            x_rows.T @ g_rows,
            g_rows.sum(axis=0),
        )

    return x.tape.record(
        "linear", x.value @ weight.value + bias.value, (x, weight, bias), backward
    )


def relu(a: Node) -> Node:
    """ReLU with subgradient 0 at exactly 0"""
    mask = a.value > 0
    return a.tape.record(
        "relu", np.where(mask, a.value, 0.0), (a,), lambda g: (g * mask,)
    )


def exp(a: Node) -> Node:
    value = np.exp(a.value)
    return a.tape.record("exp", value, (a,), lambda g: (g * value,))


def log(a: Node, floor: Optional[float] = None) -> Node:
    """
    Natural logarithm

    Parameters:
        a (Node): Positive input
        floor (Optional[float]): When given, inputs below it are clamped to it
            and receive no gradient

    Returns:
        Node: log of the (clamped) input
    """
    if floor is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            value = np.log(a.value)
        return a.tape.record("log", value, (a,), lambda g: (g / a.value,))

    live = a.value > floor
    clamped = np.maximum(a.value, floor)
    return a.tape.record(
        "log", np.log(clamped), (a,), lambda g: (np.where(live, g / clamped, 0.0),)
    )


def xlogx(a: Node) -> Node:
    """Elementwise x·log(x) with the convention 0·log 0 = 0"""
    positive = a.value > 0
    safe = np.where(positive, a.value, 1.0)
    value = np.where(positive, a.value * np.log(safe), 0.0)
    return a.tape.record(
        "xlogx",
        value,
        (a,),
        lambda g: (np.where(positive, g * (np.log(safe) + 1.0), 0.0),),
    )


def square(a: Node) -> Node:
    return a.tape.record(
        "square", a.value * a.value, (a,), lambda g: (2.0 * g * a.value,)
    )


def sum(a: Node, axis: Optional[int] = None, keepdims: bool = False) -> Node:
    shape = a.shape

    def backward(g: np.ndarray):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return a.tape.record(
        "sum", np.sum(a.value, axis=axis, keepdims=keepdims), (a,), backward
    )


def mean(a: Node, axis: Optional[int] = None, keepdims: bool = False) -> Node:
    count = a.value.size if axis is None else a.shape[axis]
    return scale(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def sum_squares(a: Node, axis: Optional[int] = None) -> Node:
    return sum(square(a), axis=axis)


def softmax(a: Node) -> Node:
    """Softmax over the last axis with max subtraction"""
    shifted = a.value - a.value.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    value = weights / weights.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray):
        return (value * (g - np.sum(g * value, axis=-1, keepdims=True)),)

    return a.tape.record("softmax", value, (a,), backward)


def l2_normalize(a: Node) -> Node:
    """
    Scale every row to unit Euclidean norm

    Raises:
        NormalizationError: If a row has zero norm
    """
    norms = np.sqrt(np.sum(a.value * a.value, axis=-1, keepdims=True))
    if np.any(norms == 0.0):
        raise NormalizationError("cannot L2-normalize a zero vector")
    value = a.value / norms

    def backward(g: np.ndarray):
        return ((g - value * np.sum(g * value, axis=-1, keepdims=True)) / norms,)

    return a.tape.record("l2_normalize", value, (a,), backward)


def sq_distances(points: Node, centers: Node) -> Node:
    """
    Squared Euclidean distance from every point to every center

    Parameters:
        points (Node): Matrix (n, d)
        centers (Node): Matrix (k, d)

    Returns:
        Node: Matrix (n, k)

    Raises:
        ShapeError: If the feature dimensions disagree
    """
    if points.ndim != 2 or centers.ndim != 2 or points.shape[1] != centers.shape[1]:
        raise ShapeError(
            f"sq_distances: points {points.shape} and centers {centers.shape}"
        )
    diff = points.value[:, np.newaxis, :] - centers.value[np.newaxis, :, :]

    def backward(g: np.ndarray):
        weighted = g[:, :, np.newaxis] * diff
        return 2.0 * weighted.sum(axis=1), -2.0 * weighted.sum(axis=0)

    return points.tape.record(
        "sq_distances", np.sum(diff * diff, axis=2), (points, centers), backward
    )


def layer_norm(
    x: Node, gamma: Node, beta: Node, eps: float = LAYER_NORM_EPS
) -> Node:
    """
    Layer normalization over the last axis with population variance

    Parameters:
        x (Node): Input (..., d)
        gamma (Node): Scale (d,)
        beta (Node): Shift (d,)
        eps (float): Variance guard, must be positive

    Returns:
        Node: gamma * (x - mean) / sqrt(var + eps) + beta
    """
    if eps <= 0:
        raise InvalidArgumentError("layer_norm eps must be positive")
    if gamma.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise ShapeError(f"layer_norm: parameters do not match input {x.shape}")
    centered = x.value - x.value.mean(axis=-1, keepdims=True)
    std = np.sqrt(np.mean(centered * centered, axis=-1, keepdims=True) + eps)
    normalized = centered / std

    def backward(g: np.ndarray):
        g_hat = g * gamma.value
        g_x = (
            g_hat
            - g_hat.mean(axis=-1, keepdims=True)
            - normalized * np.mean(g_hat * normalized, axis=-1, keepdims=True)
        ) / std
        g_rows = g.reshape(-1, x.shape[-1])
        return (
            g_x,
            (g_rows * normalized.reshape(g_rows.shape)).sum(axis=0),
            g_rows.sum(axis=0),
        )

    return x.tape.record(
        "layer_norm",
        gamma.value * normalized + beta.value,
        (x, gamma, beta),
        backward,
    )


def dropout(
    x: Node, p: float, training: bool, rng: Optional[np.random.Generator] = None
) -> Node:
    """
    Inverted dropout: zero entries with probability p, scale survivors by 1/(1-p)

    Parameters:
        x (Node): Input
        p (float): Drop probability in [0, 1)
        training (bool): Evaluation mode returns x unchanged
        rng (Optional[np.random.Generator]): Source of the mask, required when
            training with p > 0

    Returns:
        Node: Output with the same shape as x

    Raises:
        InvalidArgumentError: If p is outside [0, 1) or rng is missing
    """
    if not 0.0 <= p < 1.0:
        raise InvalidArgumentError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    if rng is None:
        raise InvalidArgumentError("dropout in training mode needs a random generator")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return x.tape.record("dropout", x.value * mask, (x,), lambda g: (g * mask,))


def straight_through(q: Node, offset: Optional[np.ndarray] = None) -> Node:
    """
    Discretize rows to one-hot in the forward pass, pass gradients unchanged

    Parameters:
        q (Node): Row-stochastic matrix or vector
        offset (Optional[np.ndarray]): Frozen (hard - soft) difference to add
            instead of recomputing the argmax; used to replay a pass exactly

    Returns:
        Node: One-hot rows (or q + offset when an offset is given)
    """
    if offset is None:
        value = one_hot_rows(q.value)
    else:
        if offset.shape != q.shape:
            raise ShapeError(f"straight_through: offset {offset.shape} vs {q.shape}")
        value = q.value + offset
    return q.tape.record("straight_through", value, (q,), lambda g: (g,))


def _radd(self: Node, other: Operand) -> Node:
    return add(other, self)


def _rsub(self: Node, other: Operand) -> Node:
    return sub(other, self)


def _rmul(self: Node, other: Operand) -> Node:
    return mul(other, self)


def _truediv(self: Node, other: float) -> Node:
    return scale(self, 1.0 / float(other))


Node.__add__ = add
Node.__radd__ = _radd
Node.__sub__ = sub
Node.__rsub__ = _rsub
Node.__mul__ = mul
Node.__rmul__ = _rmul
Node.__neg__ = neg
Node.__matmul__ = matmul
Node.__truediv__ = _truediv
