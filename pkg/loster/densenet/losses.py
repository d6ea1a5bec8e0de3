from typing import Union

import numpy as np

from loster.errors import ShapeError
from loster.numcore import Node
from loster.numcore import ops


def reconstruction_loss(x: Union[Node, np.ndarray], x_hat: Node) -> Node:
    """
    Mean over instances of the squared L2 reconstruction error

    Parameters:
        x (Union[Node, np.ndarray]): Targets (n, L)
        x_hat (Node): Reconstructions (n, L)

    Returns:
        Node: (1/n) * sum_i ||x_i - x_hat_i||^2

    Raises:
        ShapeError: If shapes differ
    """
    if x.shape != x_hat.shape:
        raise ShapeError(f"reconstruction: {x.shape} vs {x_hat.shape}")
    n = x.shape[0] if len(x.shape) == 2 else 1
    return ops.sum_squares(ops.sub(x, x_hat)) / n


def joint_reconstruction_loss(
    x: Union[Node, np.ndarray],
    x_hat: Node,
    x_aug: Union[Node, np.ndarray],
    x_aug_hat: Node,
) -> Node:
    """Sum of the original-view and augmented-view reconstruction losses"""
    return reconstruction_loss(x, x_hat) + reconstruction_loss(x_aug, x_aug_hat)
