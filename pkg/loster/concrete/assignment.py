"""
Cluster assignment: RBF probabilities, Gumbel-softmax sampling and the
straight-through discretization
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from loster.enums import AssignmentKind
from loster.errors import InvalidArgumentError, ShapeError
from loster.numcore import Node
from loster.numcore import ops

PROBABILITY_FLOOR = 1e-12
ROW_SUM_TOLERANCE = 1e-9


@dataclass
class AssignmentMatrix:
    """
    n x k cluster assignment

    Attributes:
        q (np.ndarray): Assignment values
        kind (AssignmentKind): SOFT rows are distributions, HARD rows are one-hot
    """

    q: np.ndarray
    kind: AssignmentKind

    def __post_init__(self) -> None:
        self.q = np.asarray(self.q, dtype=np.float64)
        if self.q.ndim != 2:
            raise ShapeError(f"assignment must be a matrix, got shape {self.q.shape}")
        check_row_stochastic(self.q)
        if self.kind is AssignmentKind.HARD and not np.all(
            (self.q == 0.0) | (self.q == 1.0)
        ):
            raise InvalidArgumentError("hard assignment rows must be one-hot")

    @classmethod
    def from_labels(cls, labels: np.ndarray, k: int) -> "AssignmentMatrix":
        """
        One-hot HARD assignment of integer labels

        Raises:
            InvalidArgumentError: If a label is outside 0..k-1
        """
        labels = np.asarray(labels)
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise InvalidArgumentError(f"labels must lie in 0..{k - 1}")
        return cls(np.eye(k)[labels.reshape(-1)], AssignmentKind.HARD)

    @property
    def labels(self) -> np.ndarray:
        """Argmax of every row, ties to the lowest index"""
        return np.argmax(self.q, axis=1)


def check_row_stochastic(q: np.ndarray, tolerance: float = ROW_SUM_TOLERANCE) -> None:
    """
    Verify that every row sums to 1

    Raises:
        InvalidArgumentError: If a row sum is off by more than the tolerance
    """
    deviation = np.abs(q.sum(axis=-1) - 1.0)
    if deviation.size and deviation.max() > tolerance:
        raise InvalidArgumentError(
            f"assignment rows must sum to 1 (worst deviation {deviation.max():.3g})"
        )


def assignment_probs(z: Node, centroids: Node, sigma: float) -> Node:
    """
    Normalized RBF membership of every code in every cluster

    p[i, j] = exp(-||z_i - mu_j||^2 / sigma^2) / sum_c exp(-||z_i - mu_c||^2 / sigma^2)

    Parameters:
        z (Node): Latent codes (n, d)
        centroids (Node): Centroids (k, d)
        sigma (float): RBF bandwidth

    Returns:
        Node: Row-stochastic matrix (n, k)
    """
    if sigma <= 0:
        raise InvalidArgumentError("sigma must be positive")
    if centroids.ndim != 2 or centroids.shape[0] < 1:
        raise InvalidArgumentError("need at least one centroid")
    distances = ops.sq_distances(z, centroids)
    return ops.softmax(ops.scale(distances, -1.0 / (sigma * sigma)))


def sample_gumbel(shape: Tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """
    Draw i.i.d. Gumbel(0, 1) noise as -log(-log(u)), u uniform on (0, 1)
    """
    u = rng.uniform(np.finfo(np.float64).tiny, 1.0, size=shape)
    return -np.log(-np.log(u))


def gumbel_softmax_sample(
    p: Node,
    tau: float,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> Node:
    """
    Relaxed categorical sample per row

    q[j] = softmax_j((log p[j] + g_j) / tau), probabilities clamped at 1e-12
    before the log. The noise is a constant of the tape.

    Parameters:
        p (Node): Row-stochastic probabilities (n, k) or (k,)
        tau (float): Temperature
        rng (Optional[np.random.Generator]): Noise source when noise is not given
        noise (Optional[np.ndarray]): Fixed Gumbel noise with the shape of p

    Returns:
        Node: Row-stochastic relaxed sample

    Raises:
        InvalidArgumentError: If tau is not positive or no noise source is given
    """
    if tau <= 0:
        raise InvalidArgumentError("temperature must be positive")
    if noise is None:
        if rng is None:
            raise InvalidArgumentError("gumbel sampling needs rng or noise")
        noise = sample_gumbel(p.shape, rng)
    elif noise.shape != p.shape:
        raise ShapeError(f"noise {noise.shape} does not match probabilities {p.shape}")
    logits = ops.log(p, floor=PROBABILITY_FLOOR) + noise
    return ops.softmax(ops.scale(logits, 1.0 / tau))


def straight_through(q: Node) -> Node:
    """
    One-hot at the argmax of every row (ties to the lowest index) in the
    forward pass, identity for gradients
    """
    return ops.straight_through(q)


def nearest_centroid(z: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """
    Index of the closest centroid for every row, ties to the lowest index

    Parameters:
        z (np.ndarray): Points (n, d)
        centroids (np.ndarray): Centroids (k, d)

    Returns:
        np.ndarray: Integer labels (n,)
    """
    diff = z[:, np.newaxis, :] - centroids[np.newaxis, :, :]
    return np.argmin(np.sum(diff * diff, axis=2), axis=1)


class GumbelSampler:
    """
    Source of Gumbel noise and straight-through discretization

    A frozen sampler records the noise and the (hard - soft) offsets of its
    first pass and replays them after rewind(), so repeated evaluations of a
    loss are deterministic functions of the parameters whose derivative is
    the straight-through gradient.

    Attributes:
        rng (np.random.Generator): Noise stream
        frozen (bool): Record-and-replay mode
    """

    def __init__(self, rng: np.random.Generator, frozen: bool = False) -> None:
        self.rng = rng
        self.frozen = frozen
        self._noise: List[np.ndarray] = []
        self._offsets: List[np.ndarray] = []
        self._noise_cursor = 0
        self._offset_cursor = 0

    def rewind(self) -> None:
        """Start replaying recorded draws from the beginning"""
        self._noise_cursor = 0
        self._offset_cursor = 0

    def noise(self, shape: Tuple[int, ...]) -> np.ndarray:
        if not self.frozen:
            return sample_gumbel(shape, self.rng)
        if self._noise_cursor < len(self._noise):
            noise = self._noise[self._noise_cursor]
            if noise.shape != shape:
                raise ShapeError("replayed Gumbel noise has a different shape")
        else:
            noise = sample_gumbel(shape, self.rng)
            self._noise.append(noise)
        self._noise_cursor += 1
        return noise

    def hard(self, q: Node) -> Node:
        if not self.frozen:
            return ops.straight_through(q)
        if self._offset_cursor < len(self._offsets):
            hard = ops.straight_through(q, offset=self._offsets[self._offset_cursor])
        else:
            self._offsets.append(ops.one_hot_rows(q.value) - q.value)
            hard = ops.straight_through(q)
        self._offset_cursor += 1
        return hard

    def sample(self, p: Node, tau: float) -> Tuple[Node, Node]:
        """
        Relaxed and discretized samples for a probability matrix

        Parameters:
            p (Node): Probabilities (n, k)
            tau (float): Temperature

        Returns:
            Tuple[Node, Node]: Soft sample q and its straight-through one-hot
        """
        soft = gumbel_softmax_sample(p, tau, noise=self.noise(p.shape))
        return soft, self.hard(soft)
