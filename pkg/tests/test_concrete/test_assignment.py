import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

from loster.concrete import (
    AssignmentMatrix,
    ClusterConfig,
    GumbelSampler,
    assignment_probs,
    gumbel_softmax_sample,
    nearest_centroid,
    sample_gumbel,
    straight_through,
)
from loster.enums import AssignmentKind
from loster.errors import ConfigError, InvalidArgumentError
from loster.numcore import GradientTape


def probs(z, centroids, sigma=1.0):
    tape = GradientTape()
    return assignment_probs(tape.constant(z), tape.constant(centroids), sigma).value


class TestAssignmentProbs:
    """
    Test cases for the RBF assignment probabilities.

    Test cases:
    - Equidistant point gives a uniform row
    - k = 1 gives probability 1
    - Hand example d = 1, z = 0, centroids {0, 1}
    - Rows sum to 1 and argmax is the nearest centroid for several sigmas
    - Far centroids do not overflow
    """

    def test_equidistant(self):
        """Test a point at the center of a symmetric configuration."""
        centroids = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        assert np.allclose(probs(np.zeros((1, 2)), centroids), 0.25, atol=1e-15)

    def test_single_cluster(self):
        """Test k = 1."""
        z = np.random.default_rng(0).normal(size=(5, 3))
        assert np.array_equal(probs(z, np.zeros((1, 3))), np.ones((5, 1)))

    def test_hand_example(self):
        """Test [e^0, e^-1] / (e^0 + e^-1)."""
        p = probs(np.array([[0.0]]), np.array([[0.0], [1.0]]))
        assert p[0, 0] == pytest.approx(0.7310585786300049, abs=1e-12)
        assert p[0, 1] == pytest.approx(0.2689414213699951, abs=1e-12)

    def test_rows_and_argmax(self):
        """Test row sums and argmax invariance for several sigmas."""
        rng = np.random.default_rng(1)
        for sigma in (0.1, 1.0, 10.0):
            z = rng.normal(size=(40, 4))
            centroids = rng.normal(size=(5, 4))
            p = probs(z, centroids, sigma)
            assert np.allclose(p.sum(axis=1), 1.0, atol=1e-9)
            assert np.array_equal(np.argmax(p, axis=1), nearest_centroid(z, centroids))

    def test_far_centroids(self):
        """Test that huge distances stay finite."""
        p = probs(np.array([[0.0]]), np.array([[100.0], [101.0]]), sigma=0.5)
        assert np.all(np.isfinite(p))
        assert p[0, 0] == pytest.approx(1.0)

    def test_invalid_sigma(self):
        """Test that sigma must be positive."""
        with pytest.raises(InvalidArgumentError):
            probs(np.zeros((1, 1)), np.zeros((1, 1)), sigma=0.0)


class TestGumbelSoftmax:
    """
    Test cases for Gumbel noise and the relaxed sample.

    Test cases:
    - Gumbel draws have the Gumbel(0, 1) mean
    - k = 1 always yields [1]
    - Rows sum to 1
    - Zero probabilities are clamped, not -inf
    - Low temperature approaches the one-hot argmax of log p + g
    - Argmax frequencies follow p (Gumbel-max property)
    """

    def test_gumbel_mean(self):
        """Test the Euler-Mascheroni mean of Gumbel(0, 1)."""
        draws = sample_gumbel((200000,), np.random.default_rng(0))
        assert np.mean(draws) == pytest.approx(0.5772156649, abs=0.01)

    def test_single_category(self):
        """Test k = 1 for several temperatures."""
        tape = GradientTape()
        for tau in (0.01, 1.0, 10.0):
            q = gumbel_softmax_sample(tape.constant(np.ones((3, 1))), tau, np.random.default_rng(0))
            assert np.array_equal(q.value, np.ones((3, 1)))

    def test_row_sums(self):
        """Test normalization on random probability rows."""
        rng = np.random.default_rng(2)
        p = rng.dirichlet(np.ones(4), size=50)
        q = gumbel_softmax_sample(GradientTape().constant(p), 0.5, rng)
        assert np.allclose(q.value.sum(axis=1), 1.0, atol=1e-9)

    def test_zero_probability(self):
        """Test that an exact zero is clamped at 1e-12."""
        p = np.array([[1.0, 0.0]])
        q = gumbel_softmax_sample(GradientTape().constant(p), 1.0, noise=np.zeros((1, 2)))
        assert np.all(np.isfinite(q.value))
        assert q.value[0, 1] == pytest.approx(1e-12 / (1.0 + 1e-12))

    def test_temperature_limit(self):
        """Test that at tau = 0.01 non-argmax entries fall below 1e-6."""
        p = np.array([[0.5, 0.3, 0.2]])
        noise = np.array([[0.0, 0.0, 0.0]])
        tape = GradientTape()
        logits = np.log(p[0])
        assert np.min(logits[0] - logits[1:]) >= 0.2
        soft = {}
        for tau in (10.0, 1.0, 0.1, 0.01):
            soft[tau] = gumbel_softmax_sample(tape.constant(p), tau, noise=noise).value[0]
        assert soft[0.01][0] > soft[0.1][0] > soft[1.0][0] > soft[10.0][0]
        assert soft[0.01][1:].max() < 1e-6

    def test_invalid_tau(self):
        """Test that tau must be positive."""
        with pytest.raises(InvalidArgumentError):
            gumbel_softmax_sample(GradientTape().constant(np.ones((1, 1))), 0.0, np.random.default_rng(0))

    def test_categorical_frequencies(self):
        """Test total-variation distance below 0.02 over 100000 hard samples."""
        p = np.array([0.6, 0.3, 0.1])
        rows = np.tile(p, (100000, 1))
        tape = GradientTape()
        q = gumbel_softmax_sample(tape.constant(rows), 0.1, np.random.default_rng(123))
        hard = straight_through(q).value
        frequencies = hard.mean(axis=0)
        assert 0.5 * np.abs(frequencies - p).sum() < 0.02


class TestStraightThrough:
    """
    Test cases for straight_through and AssignmentMatrix.

    Test cases:
    - Argmax rows, ties to the lowest index, one-hot input unchanged
    - AssignmentMatrix validates row sums and one-hot rows
    """

    def test_examples(self):
        """Test the three forward examples."""
        tape = GradientTape()
        q = tape.constant(np.array([[0.7, 0.2, 0.1], [0.0, 0.0, 1.0]]))
        assert np.array_equal(straight_through(q).value, [[1, 0, 0], [0, 0, 1]])
        tie = tape.constant(np.array([[0.5, 0.5]]))
        assert np.array_equal(straight_through(tie).value, [[1.0, 0.0]])

    def test_assignment_matrix(self):
        """Test the kinds and their invariants."""
        hard = AssignmentMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), AssignmentKind.HARD)
        assert np.array_equal(hard.labels, [1, 0])
        AssignmentMatrix(np.array([[0.25, 0.75]]), AssignmentKind.SOFT)
        with pytest.raises(InvalidArgumentError):
            AssignmentMatrix(np.array([[0.25, 0.75]]), AssignmentKind.HARD)
        with pytest.raises(InvalidArgumentError):
            AssignmentMatrix(np.array([[0.5, 0.6]]), AssignmentKind.SOFT)

    def test_from_labels(self):
        """Test one-hot rows built from integer labels."""
        hard = AssignmentMatrix.from_labels(np.array([2, 0, 2]), 3)
        assert hard.kind is AssignmentKind.HARD
        assert np.array_equal(hard.q, [[0, 0, 1], [1, 0, 0], [0, 0, 1]])
        assert np.array_equal(hard.labels, [2, 0, 2])
        for labels in ([0, 3], [-1, 0]):
            with pytest.raises(InvalidArgumentError):
                AssignmentMatrix.from_labels(np.array(labels), 3)


class TestGumbelSampler:
    """
    Test cases for the sampler used by training and gradient checks.

    Test cases:
    - A frozen sampler replays noise and hard rows after rewind
    - An unfrozen sampler draws fresh noise
    """

    def test_frozen_replay(self):
        """Test that replayed passes reproduce the first one exactly."""
        sampler = GumbelSampler(np.random.default_rng(0), frozen=True)
        p = np.random.default_rng(1).dirichlet(np.ones(3), size=4)
        first = sampler.sample(GradientTape().constant(p), 0.5)
        sampler.rewind()
        second = sampler.sample(GradientTape().constant(p), 0.5)
        assert np.array_equal(first[0].value, second[0].value)
        assert np.allclose(first[1].value, second[1].value, rtol=0.0, atol=1e-15)

    def test_fresh_noise(self):
        """Test that an unfrozen sampler does not repeat itself."""
        sampler = GumbelSampler(np.random.default_rng(0))
        assert not np.array_equal(sampler.noise((5, 3)), sampler.noise((5, 3)))


def test_cluster_config():
    """
    Test ClusterConfig defaults and validation.
    """
    config = ClusterConfig(k=3)
    assert (config.sigma, config.tau, config.tau_floor) == (1.0, 10.0, 0.01)
    for kwargs in ({"k": 0}, {"k": 2, "sigma": 0.0}, {"k": 2, "tau": -1.0}):
        with pytest.raises(ConfigError):
            ClusterConfig(**kwargs)
