import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

from loster.densenet import (
    NetConfig,
    ViewModel,
    decode,
    embed,
    encode,
    joint_reconstruction_loss,
    load_checkpoint,
    reconstruction_loss,
    residual_block_forward,
    save_checkpoint,
)
from loster.enums import Mode, ViewTag
from loster.errors import ConfigError, DataFormatError, ShapeError
from loster.numcore import GradientTape, finite_diff_check


@pytest.fixture
def config():
    return NetConfig(n_enc=2, n_dec=2, hidden_dim=5, dropout=0.1)


@pytest.fixture
def model(config):
    return ViewModel.create(12, config, ViewTag.ORIGINAL, np.random.default_rng(0))


class TestNetConfig:
    """
    Test cases for NetConfig validation.

    Test cases:
    - Defaults are three blocks, d = 256, dropout 0.1, layer norm on
    - Invalid values raise ConfigError
    """

    def test_defaults(self):
        """Test the default architecture."""
        config = NetConfig()
        assert (config.n_enc, config.n_dec, config.hidden_dim) == (3, 3, 256)
        assert config.dropout == 0.1
        assert config.layer_norm and not config.output_layer_norm

    def test_invalid(self):
        """Test invalid block counts, width and dropout."""
        for kwargs in ({"n_enc": 0}, {"hidden_dim": 0}, {"dropout": 1.0}):
            with pytest.raises(ConfigError):
                NetConfig(**kwargs)


class TestViewModel:
    """
    Test cases for ViewModel construction, encode and decode.

    Test cases:
    - Block dimensions: L -> d ... d -> L
    - Output shapes for batches and single series
    - Eval-mode determinism
    - Encode equals manual composition of blocks
    - Shape errors
    - Views get independent weights
    """

    def test_dimensions(self, model):
        """Test the widths of every block."""
        assert [b.in_dim for b in model.encoder] == [12, 5]
        assert [b.out_dim for b in model.encoder] == [5, 5]
        assert [b.in_dim for b in model.decoder] == [5, 5]
        assert [b.out_dim for b in model.decoder] == [5, 12]
        assert model.decoder[-1].has_layer_norm is False
        assert model.encoder[0].has_layer_norm is True

    def test_shapes(self, model):
        """Test batch and single-series shapes."""
        rng = np.random.default_rng(1)
        tape = GradientTape()
        z = encode(rng.normal(size=(7, 12)), model, Mode.EVAL, tape)
        assert z.shape == (7, 5)
        assert decode(z, model, Mode.EVAL, tape).shape == (7, 12)
        single = encode(rng.normal(size=12), model, Mode.EVAL, tape)
        assert single.shape == (5,)
        assert decode(single, model, Mode.EVAL, tape).shape == (12,)

    def test_eval_determinism(self, model):
        """Test that two eval passes agree bitwise."""
        x = np.random.default_rng(2).normal(size=(4, 12))
        assert np.array_equal(embed(model, x), embed(model, x))

    def test_composition(self, model):
        """Test that encode is the two blocks applied in sequence."""
        x = np.random.default_rng(3).normal(size=(3, 12))
        tape = GradientTape()
        manual = residual_block_forward(x, model.encoder[0], tape)
        manual = residual_block_forward(manual, model.encoder[1], tape)
        assert np.array_equal(encode(x, model, Mode.EVAL, tape).value, manual.value)

    def test_single_decoder_block(self):
        """Test that one decoder block equals one residual_block_forward call."""
        config = NetConfig(n_enc=1, n_dec=1, hidden_dim=4)
        model = ViewModel.create(6, config, ViewTag.ORIGINAL, np.random.default_rng(4))
        z = np.random.default_rng(5).normal(size=(2, 4))
        tape = GradientTape()
        expected = residual_block_forward(z, model.decoder[0], tape).value
        assert np.array_equal(decode(z, model, Mode.EVAL, tape).value, expected)

    def test_shape_errors(self, model):
        """Test wrong series length and wrong code width."""
        with pytest.raises(ShapeError):
            encode(np.ones((2, 11)), model, Mode.EVAL, GradientTape())
        with pytest.raises(ShapeError):
            decode(np.ones((2, 4)), model, Mode.EVAL, GradientTape())

    def test_independent_views(self, config):
        """Test that the two views share architecture but not weights."""
        rng = np.random.default_rng(0)
        original = ViewModel.create(12, config, ViewTag.ORIGINAL, rng)
        augmented = ViewModel.create(12, config, ViewTag.AUGMENTED, rng)
        assert [p.shape for p in original.parameters()] == [
            p.shape for p in augmented.parameters()
        ]
        assert not np.array_equal(
            original.encoder[0].w_hidden.value, augmented.encoder[0].w_hidden.value
        )
        assert original.encoder[0].w_hidden.name.startswith("original.")
        assert augmented.encoder[0].w_hidden.name.startswith("augmented.")

    def test_centroids(self, model):
        """Test centroid installation and its width check."""
        assert model.k is None
        model.set_centroids(np.zeros((3, 5)))
        assert model.k == 3
        assert model.parameters()[-1].name == "original.centroids"
        with pytest.raises(ShapeError):
            model.set_centroids(np.zeros((3, 4)))


class TestReconstructionLoss:
    """
    Test cases for the reconstruction losses.

    Test cases:
    - Perfect reconstruction gives 0
    - Squared norm summed over time, averaged over instances
    - Joint loss of identical views is twice the single loss
    - Gradient matches finite differences over all model parameters
    """

    def test_zero(self):
        """Test X_hat = X."""
        tape = GradientTape()
        x = np.arange(6.0).reshape(2, 3)
        assert reconstruction_loss(x, tape.constant(x)).item() == 0.0

    def test_residual_vector(self):
        """Test n = 1 with residual [1, 1]."""
        tape = GradientTape()
        loss = reconstruction_loss(np.array([[1.0, 1.0]]), tape.constant(np.zeros((1, 2))))
        assert loss.item() == 2.0

    def test_joint_additivity(self):
        """Test that identical views double the loss."""
        tape = GradientTape()
        x = np.random.default_rng(0).normal(size=(4, 3))
        x_hat = tape.constant(np.zeros((4, 3)))
        single = reconstruction_loss(x, x_hat).item()
        joint = joint_reconstruction_loss(x, x_hat, x, x_hat).item()
        assert joint == pytest.approx(2.0 * single)

    def test_shape_mismatch(self):
        """Test that shapes must agree."""
        with pytest.raises(ShapeError):
            reconstruction_loss(np.ones((2, 3)), GradientTape().constant(np.ones((3, 2))))

    def test_gradient(self):
        """Test the autoencoder gradient with ReLUs kept away from their kinks."""
        config = NetConfig(n_enc=1, n_dec=1, hidden_dim=4, dropout=0.0)
        model = ViewModel.create(6, config, ViewTag.ORIGINAL, np.random.default_rng(7))
        for block in model.encoder + model.decoder:
            block.b_hidden.value += 3.0
        x = np.random.default_rng(8).normal(size=(5, 6))

        def loss(tape):
            z = encode(x, model, Mode.EVAL, tape)
            return reconstruction_loss(x, decode(z, model, Mode.EVAL, tape))

        assert finite_diff_check(loss, model.network_parameters()) < 1e-4


class TestCheckpoint:
    """
    Test cases for checkpoint files.

    Test cases:
    - Round trip keeps every parameter, the view and the architecture
    - Models without centroids round-trip too
    - Files that are not checkpoints raise DataFormatError
    """

    def test_round_trip(self, model, tmp_path):
        """Test that all values survive save and load."""
        model.set_centroids(np.random.default_rng(0).normal(size=(3, 5)))
        path = save_checkpoint(model, tmp_path / "original")
        assert path.suffix == ".npz"
        restored = load_checkpoint(path)
        assert restored.view is ViewTag.ORIGINAL
        assert restored.config == model.config
        assert restored.k == 3
        for saved, loaded in zip(model.parameters(), restored.parameters()):
            assert saved.name == loaded.name
            assert np.array_equal(saved.value, loaded.value)

    def test_without_centroids(self, model, tmp_path):
        """Test a pretrained-only model."""
        restored = load_checkpoint(save_checkpoint(model, tmp_path / "m.npz"))
        assert restored.k is None
        x = np.random.default_rng(0).normal(size=(2, 12))
        assert np.array_equal(embed(model, x), embed(restored, x))

    def test_not_a_checkpoint(self, tmp_path):
        """Test an npz archive without header."""
        path = tmp_path / "other.npz"
        np.savez(path, values=np.ones(3))
        with pytest.raises(DataFormatError):
            load_checkpoint(path)
