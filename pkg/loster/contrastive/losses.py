"""
Dual contrastive losses

Instance level: each code and its augmented counterpart form the positive
pair; the other codes of the batch are negatives. Cluster level: column i of
the assignment matrix represents cluster i, and the same column of the other
view is its positive.

For a row u_i the loss term is

    l_i = -log( exp(sim(u_i, v_i)/t) /
                sum_j [ exp(sim(u_i, u_j)/t) + [i != j] exp(sim(u_i, v_j)/t) ] )

with the self-similarity j = i kept in the first sum. With exclude_self the
denominator instead drops j = i from the first sum and keeps every term of
the second.
"""

import numpy as np

from loster.concrete.assignment import check_row_stochastic
from loster.errors import InvalidArgumentError, ShapeError
from loster.numcore import Node
from loster.numcore import ops

ENTROPY_ROW_TOLERANCE = 1e-8


def l2_normalize(v: Node) -> Node:
    """
    Scale a vector (or every row of a matrix) to unit L2 norm

    Raises:
        NormalizationError: If a norm is zero
    """
    return ops.l2_normalize(v)


def _pair_terms(u: Node, v: Node, tau: float, exclude_self: bool) -> Node:
    """Vector of l_i for every row of u against the rows of v"""
    m = u.shape[0]
    u_unit, v_unit = ops.l2_normalize(u), ops.l2_normalize(v)
    within = u_unit @ ops.transpose(u_unit)
    across = u_unit @ ops.transpose(v_unit)

    eye = np.eye(m)
    off_diagonal = 1.0 - eye
    within_mask = off_diagonal if exclude_self else np.ones((m, m))
    across_mask = np.ones((m, m)) if exclude_self else off_diagonal

    # cosine similarities are at most 1, so shifting by 1/tau keeps exp <= 1
    inv_tau = 1.0 / tau
    within_terms = ops.exp(ops.scale(within - 1.0, inv_tau)) * within_mask
    across_terms = ops.exp(ops.scale(across - 1.0, inv_tau)) * across_mask
    denominator = ops.sum(within_terms, axis=1) + ops.sum(across_terms, axis=1)
    positive = ops.sum(across * eye, axis=1)
    return ops.log(denominator) + inv_tau - ops.scale(positive, inv_tau)


def _check_pair(a: Node, b: Node, what: str) -> None:
    if a.ndim != 2 or a.shape != b.shape:
        raise ShapeError(
            f"{what}: views must be equal-shaped matrices, got {a.shape} and {b.shape}"
        )
    if a.shape[0] < 1:
        raise InvalidArgumentError(f"{what}: need at least one row")


def instance_loss(
    z: Node, z_aug: Node, tau_i: float, exclude_self: bool = False
) -> Node:
    """
    Symmetric instance contrastive loss

    Parameters:
        z (Node): Original-view codes (n, d)
        z_aug (Node): Augmented-view codes (n, d)
        tau_i (float): Temperature
        exclude_self (bool): Conventional NT-Xent denominator

    Returns:
        Node: (1/2n) * sum_i (l_{z_i} + l_{z_i^a})

    Raises:
        NormalizationError: If a code is the zero vector
    """
    _check_pair(z, z_aug, "instance loss")
    if tau_i <= 0:
        raise InvalidArgumentError("tau_i must be positive")
    n = z.shape[0]
    total = ops.sum(_pair_terms(z, z_aug, tau_i, exclude_self)) + ops.sum(
        _pair_terms(z_aug, z, tau_i, exclude_self)
    )
    return total / (2 * n)


def cluster_entropy(q: Node, q_aug: Node) -> Node:
    """
    Entropy of the cluster-size distribution of both views

    H = -sum_i [p(q_i) log p(q_i) + p(q_i^a) log p(q_i^a)], p(q_i) the mean of
    column i, with 0 log 0 = 0.
    """
    _check_pair(q, q_aug, "cluster entropy")
    sizes = ops.mean(q, axis=0)
    sizes_aug = ops.mean(q_aug, axis=0)
    return -(ops.sum(ops.xlogx(sizes)) + ops.sum(ops.xlogx(sizes_aug)))


def cluster_loss(
    q: Node, q_aug: Node, tau_c: float, exclude_self: bool = False
) -> Node:
    """
    Cluster contrastive loss minus the assignment entropy

    Parameters:
        q (Node): Original-view soft assignments (n, k)
        q_aug (Node): Augmented-view soft assignments (n, k)
        tau_c (float): Temperature
        exclude_self (bool): Conventional NT-Xent denominator

    Returns:
        Node: (1/2k) * sum_i (l_{q_i} + l_{q_i^a}) - H

    Raises:
        InvalidArgumentError: If a row does not sum to 1
        NormalizationError: If a cluster column is all zeros
    """
    _check_pair(q, q_aug, "cluster loss")
    if tau_c <= 0:
        raise InvalidArgumentError("tau_c must be positive")
    check_row_stochastic(q.value, ENTROPY_ROW_TOLERANCE)
    check_row_stochastic(q_aug.value, ENTROPY_ROW_TOLERANCE)
    k = q.shape[1]
    columns, columns_aug = ops.transpose(q), ops.transpose(q_aug)
    forward = _pair_terms(columns, columns_aug, tau_c, exclude_self)
    backward = _pair_terms(columns_aug, columns, tau_c, exclude_self)
    contrast = ops.sum(forward) + ops.sum(backward)
    return contrast / (2 * k) - cluster_entropy(q, q_aug)
