import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

from loster.concrete import (
    GumbelSampler,
    assignment_probs,
    kmeans_loss,
    kmeanspp_init,
    lloyd_objective,
    lloyd_refine,
    nearest_centroid,
    two_view_kmeans_loss,
)
from loster.errors import InvalidArgumentError, ShapeError
from loster.numcore import GradientTape, Parameter, finite_diff_check


def one_hot(labels, k):
    return np.eye(k)[labels]


class TestKMeansLoss:
    """
    Test cases for the hard k-means loss.

    Test cases:
    - Codes sitting on their centroids give 0
    - n = 1, d = 1, z = 2, centroid 0 gives 4
    - Agreement with the classical objective on random instances
    - Non-one-hot assignments and wrong shapes are rejected
    - The two-view loss is the mean of both views
    """

    def test_zero_at_centroids(self):
        """Test codes equal to their assigned centroid."""
        tape = GradientTape()
        centroids = np.array([[0.0, 1.0], [2.0, -1.0]])
        labels = np.array([1, 0, 1])
        loss = kmeans_loss(
            tape.constant(centroids[labels]),
            tape.constant(one_hot(labels, 2)),
            tape.constant(centroids),
        )
        assert loss.item() == 0.0

    def test_hand_example(self):
        """Test the single-point example."""
        tape = GradientTape()
        loss = kmeans_loss(
            tape.constant(np.array([[2.0]])),
            tape.constant(np.array([[1.0]])),
            tape.constant(np.array([[0.0]])),
        )
        assert loss.item() == pytest.approx(4.0)

    def test_matches_lloyd_objective(self):
        """Test 100 random instances against the classical objective."""
        rng = np.random.default_rng(7)
        for _ in range(100):
            n, d, k = rng.integers(1, 20), rng.integers(1, 5), rng.integers(1, 6)
            z = rng.normal(size=(n, d))
            centroids = rng.normal(size=(k, d))
            labels = rng.integers(0, k, size=n)
            tape = GradientTape()
            loss = kmeans_loss(
                tape.constant(z), tape.constant(one_hot(labels, k)), tape.constant(centroids)
            )
            assert abs(loss.item() - lloyd_objective(z, centroids, labels)) < 1e-12

    def test_rejects_soft_rows(self):
        """Test that a soft assignment is not accepted."""
        tape = GradientTape()
        with pytest.raises(InvalidArgumentError):
            kmeans_loss(
                tape.constant(np.zeros((1, 2))),
                tape.constant(np.array([[0.5, 0.5]])),
                tape.constant(np.zeros((2, 2))),
            )

    def test_rejects_shapes(self):
        """Test that mismatched shapes raise ShapeError."""
        tape = GradientTape()
        with pytest.raises(ShapeError):
            kmeans_loss(
                tape.constant(np.zeros((3, 2))),
                tape.constant(one_hot(np.array([0, 1]), 2)),
                tape.constant(np.zeros((2, 2))),
            )

    def test_two_views(self):
        """Test the average of two views."""
        tape = GradientTape()
        z = tape.constant(np.array([[2.0]]))
        z_aug = tape.constant(np.array([[1.0]]))
        q = tape.constant(np.array([[1.0]]))
        m = tape.constant(np.array([[0.0]]))
        assert two_view_kmeans_loss(z, q, m, z_aug, q, m).item() == pytest.approx(2.5)


def test_straight_through_gradient():
    """
    Test the k-means loss gradient through a frozen Gumbel sampler.

    Test cases:
    - Gradients for codes and centroids agree with finite differences
    - Centroids only receive gradient from their assigned codes
    """
    rng = np.random.default_rng(3)
    z = Parameter("z", rng.normal(size=(6, 3)))
    m = Parameter("m", rng.normal(size=(3, 3)))
    sampler = GumbelSampler(np.random.default_rng(4), frozen=True)

    def loss_fn(tape):
        sampler.rewind()
        codes, centroids = tape.watch(z), tape.watch(m)
        p = assignment_probs(codes, centroids, 1.0)
        _, hard = sampler.sample(p, 1.0)
        return kmeans_loss(codes, hard, centroids)

    assert finite_diff_check(loss_fn, [z, m]) < 1e-4


def test_hard_assignment_gradient_direction():
    """
    Test that a code's gradient pulls it toward its centroid when the
    assignment is held fixed.
    """
    z = Parameter("z", np.array([[1.0, 1.0]]))
    tape = GradientTape()
    loss = kmeans_loss(
        tape.watch(z), tape.constant(np.array([[1.0, 0.0]])), tape.constant(np.zeros((2, 2)))
    )
    tape.backward(loss)
    assert np.allclose(z.grad, [[2.0, 2.0]])


class TestLloyd:
    """
    Test cases for Lloyd refinement.

    Test cases:
    - Two well separated blobs converge to their means
    - An empty cluster keeps its centroid
    - The objective never increases
    """

    def test_blob_means(self):
        """Test convergence on two blobs."""
        z = np.array([[0.0], [0.2], [10.0], [10.4]])
        centroids, labels = lloyd_refine(z, np.array([[0.0], [10.0]]), 10)
        assert np.allclose(centroids, [[0.1], [10.2]])
        assert np.array_equal(labels, [0, 0, 1, 1])

    def test_empty_cluster(self):
        """Test a centroid nobody is assigned to."""
        z = np.array([[0.0], [1.0]])
        centroids, labels = lloyd_refine(z, np.array([[0.5], [100.0]]), 5)
        assert centroids[1, 0] == 100.0
        assert np.array_equal(labels, [0, 0])

    def test_monotone(self):
        """Test that each iteration does not increase the objective."""
        rng = np.random.default_rng(5)
        z = rng.normal(size=(60, 2))
        centroids = z[:4].copy()
        previous = lloyd_objective(z, centroids, nearest_centroid(z, centroids))
        for _ in range(5):
            centroids, labels = lloyd_refine(z, centroids, 1)
            current = lloyd_objective(z, centroids, labels)
            assert current <= previous + 1e-12
            previous = current


class TestKMeansPlusPlus:
    """
    Test cases for k-means++ seeding.

    Test cases:
    - k = n without refinement returns a permutation of the points
    - k = 1 returns one of the points
    - k outside [1, n] is rejected
    - Three separated blobs get one center each in at least 95% of trials
    - Duplicate points do not break sampling
    - Seeding is reproducible for a fixed stream
    """

    def test_permutation(self):
        """Test k = n."""
        z = np.random.default_rng(0).normal(size=(7, 2))
        centroids = kmeanspp_init(z, 7, np.random.default_rng(1), lloyd_iterations=0)
        assert sorted(map(tuple, centroids)) == sorted(map(tuple, z))

    def test_single_center(self):
        """Test k = 1."""
        z = np.random.default_rng(0).normal(size=(5, 2))
        centroids = kmeanspp_init(z, 1, np.random.default_rng(2), lloyd_iterations=0)
        assert any(np.array_equal(centroids[0], point) for point in z)

    @pytest.mark.parametrize("k", [0, 6])
    def test_invalid_k(self, k):
        """Test k = 0 and k > n."""
        with pytest.raises(InvalidArgumentError):
            kmeanspp_init(np.zeros((5, 2)), k, np.random.default_rng(0))

    def test_blobs(self):
        """Test that seeding spreads over separated blobs."""
        data_rng = np.random.default_rng(11)
        means = np.array([[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]])
        z = np.concatenate([mean + data_rng.normal(size=(10, 2)) for mean in means])
        blob = np.repeat(np.arange(3), 10)
        hits = 0
        trials = 200
        for seed in range(trials):
            centroids = kmeanspp_init(z, 3, np.random.default_rng(seed), lloyd_iterations=0)
            chosen = blob[[int(np.argmin(np.sum((z - c) ** 2, axis=1))) for c in centroids]]
            hits += len(set(chosen)) == 3
        assert hits >= 0.95 * trials

    def test_duplicates(self):
        """Test a data set with fewer distinct points than k."""
        z = np.array([[1.0, 1.0]] * 4 + [[2.0, 2.0]])
        centroids = kmeanspp_init(z, 3, np.random.default_rng(0))
        assert centroids.shape == (3, 2)
        assert np.all(np.isfinite(centroids))

    def test_reproducible(self):
        """Test two identical streams give identical centers."""
        z = np.random.default_rng(0).normal(size=(30, 3))
        first = kmeanspp_init(z, 4, np.random.default_rng(9))
        second = kmeanspp_init(z, 4, np.random.default_rng(9))
        assert np.array_equal(first, second)
