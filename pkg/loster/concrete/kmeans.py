from typing import Tuple

import numpy as np

from loster.concrete.assignment import nearest_centroid
from loster.errors import InvalidArgumentError, ShapeError
from loster.numcore import Node
from loster.numcore import ops

# replayed straight-through rows sit within a finite-difference step of one-hot
HARD_TOLERANCE = 1e-2


def kmeans_loss(z: Node, q_hard: Node, centroids: Node) -> Node:
    """
    Hard k-means objective on latent codes

    Parameters:
        z (Node): Latent codes (n, d)
        q_hard (Node): One-hot assignments (n, k), typically straight-through output
        centroids (Node): Centroids (k, d)

    Returns:
        Node: (1/n) * sum_i ||z_i - q_i M||^2

    Raises:
        ShapeError: If shapes disagree
        InvalidArgumentError: If q_hard rows are not one-hot
    """
    if q_hard.shape != (z.shape[0], centroids.shape[0]):
        raise ShapeError(
            f"assignment {q_hard.shape} does not match codes {z.shape} "
            f"and centroids {centroids.shape}"
        )
    rounded = np.round(q_hard.value)
    if np.abs(q_hard.value - rounded).max(initial=0.0) > HARD_TOLERANCE or np.any(
        rounded.sum(axis=1) != 1.0
    ):
        raise InvalidArgumentError("k-means loss needs one-hot assignments")
    return ops.sum_squares(z - q_hard @ centroids) / z.shape[0]


def two_view_kmeans_loss(
    z: Node,
    q_hard: Node,
    centroids: Node,
    z_aug: Node,
    q_hard_aug: Node,
    centroids_aug: Node,
) -> Node:
    """Average of the two views' k-means losses"""
    original = kmeans_loss(z, q_hard, centroids)
    augmented = kmeans_loss(z_aug, q_hard_aug, centroids_aug)
    return 0.5 * (original + augmented)


def lloyd_objective(z: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    """
    Mean squared distance of every point to its assigned centroid

    Parameters:
        z (np.ndarray): Points (n, d)
        centroids (np.ndarray): Centroids (k, d)
        labels (np.ndarray): Assigned cluster per point

    Returns:
        float: The classical k-means objective divided by n
    """
    residual = z - centroids[labels]
    return float(np.mean(np.sum(residual * residual, axis=1)))


def lloyd_refine(
    z: np.ndarray, centroids: np.ndarray, iterations: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Classical Lloyd iterations; an empty cluster keeps its centroid

    Parameters:
        z (np.ndarray): Points (n, d)
        centroids (np.ndarray): Starting centroids (k, d)
        iterations (int): Maximum number of iterations

    Returns:
        Tuple[np.ndarray, np.ndarray]: Refined centroids and final labels
    """
    centroids = np.array(centroids, dtype=np.float64)
    labels = nearest_centroid(z, centroids)
    for _ in range(iterations):
        updated = centroids.copy()
        for j in range(centroids.shape[0]):
            members = z[labels == j]
            if len(members):
                updated[j] = members.mean(axis=0)
        if np.array_equal(updated, centroids):
            break
        centroids = updated
        labels = nearest_centroid(z, centroids)
    return centroids, labels


def kmeanspp_init(
    z: np.ndarray,
    k: int,
    rng: np.random.Generator,
    lloyd_iterations: int = 10,
) -> np.ndarray:
    """
    k-means++ seeding followed by Lloyd refinement

    The first center is drawn uniformly; each further center is drawn with
    probability proportional to the squared distance to the nearest chosen
    center. When every remaining point coincides with a chosen center the
    next one is drawn uniformly among the points not chosen yet.

    Parameters:
        z (np.ndarray): Points (n, d)
        k (int): Number of centers, 1 <= k <= n
        rng (np.random.Generator): Sampling stream
        lloyd_iterations (int): Refinement iterations, 0 for pure seeding

    Returns:
        np.ndarray: Centroids (k, d)

    Raises:
        InvalidArgumentError: If k is outside [1, n]
    """
    z = np.asarray(z, dtype=np.float64)
    n = z.shape[0]
    if k < 1 or k > n:
        raise InvalidArgumentError(f"k must be between 1 and n={n}, got {k}")
    if lloyd_iterations < 0:
        raise InvalidArgumentError("lloyd_iterations must be non-negative")

    chosen = [int(rng.integers(n))]
    closest = np.sum((z - z[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            index = int(rng.choice(n, p=closest / total))
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            index = int(rng.choice(remaining))
        chosen.append(index)
        closest = np.minimum(closest, np.sum((z - z[index]) ** 2, axis=1))

    centroids = z[chosen].copy()
    if lloyd_iterations:
        centroids, _ = lloyd_refine(z, centroids, lloyd_iterations)
    return centroids
