from typing import List, Optional, Union

import numpy as np

from loster.densenet.blocks import ResidualBlockParams, residual_block_forward
from loster.densenet.config import NetConfig
from loster.enums import Mode, ViewTag
from loster.errors import ShapeError
from loster.numcore import GradientTape, Node, Parameter


class ViewModel:
    """
    Autoencoder of one view plus its centroid matrix

    The first encoder block maps L -> d and the rest d -> d; decoder blocks
    map d -> d except the last, which maps d -> L. Every hidden layer has
    width d.

    Attributes:
        view (ViewTag): Which pipeline the model serves
        config (NetConfig): Architecture
        input_length (int): Series length L
        encoder (List[ResidualBlockParams]): Encoder stack
        decoder (List[ResidualBlockParams]): Decoder stack
        centroids (Optional[Parameter]): k x d centroid matrix, None until initialized
    """

    def __init__(
        self,
        view: ViewTag,
        config: NetConfig,
        input_length: int,
        encoder: List[ResidualBlockParams],
        decoder: List[ResidualBlockParams],
        centroids: Optional[Parameter] = None,
    ) -> None:
        self.view = view
        self.config = config
        self.input_length = input_length
        self.encoder = encoder
        self.decoder = decoder
        self.centroids = centroids

    @classmethod
    def create(
        cls,
        input_length: int,
        config: NetConfig,
        view: ViewTag,
        rng: np.random.Generator,
    ) -> "ViewModel":
        """
        Build a freshly initialized view model

        Parameters:
            input_length (int): Series length L
            config (NetConfig): Architecture
            view (ViewTag): Original or augmented
            rng (np.random.Generator): Initialization stream

        Returns:
            ViewModel: Model without centroids
        """
        if input_length < 1:
            raise ShapeError("input length must be positive")
        d = config.hidden_dim
        encoder = [
            ResidualBlockParams.create(
                f"{view.value}.encoder.{i}",
                input_length if i == 0 else d,
                d,
                d,
                config.layer_norm,
                rng,
            )
            for i in range(config.n_enc)
        ]
        decoder = []
        for i in range(config.n_dec):
            last = i == config.n_dec - 1
            decoder.append(
                ResidualBlockParams.create(
                    f"{view.value}.decoder.{i}",
                    d,
                    d,
                    input_length if last else d,
                    config.layer_norm and (config.output_layer_norm or not last),
                    rng,
                )
            )
        return cls(view, config, input_length, encoder, decoder)

    @property
    def hidden_dim(self) -> int:
        return self.config.hidden_dim

    @property
    def k(self) -> Optional[int]:
        return None if self.centroids is None else self.centroids.shape[0]

    def set_centroids(self, centroids: np.ndarray) -> None:
        """
        Install a centroid matrix

        Parameters:
            centroids (np.ndarray): Matrix k x d

        Raises:
            ShapeError: If the width is not d
        """
        centroids = np.asarray(centroids, dtype=np.float64)
        if centroids.ndim != 2 or centroids.shape[1] != self.hidden_dim:
            raise ShapeError(
                f"centroids must be k x {self.hidden_dim}, got {centroids.shape}"
            )
        self.centroids = Parameter(f"{self.view.value}.centroids", centroids)

    def network_parameters(self) -> List[Parameter]:
        params: List[Parameter] = []
        for block in self.encoder + self.decoder:
            params += block.parameters()
        return params

    def parameters(self) -> List[Parameter]:
        """All trainable parameters, centroids last when present"""
        params = self.network_parameters()
        if self.centroids is not None:
            params.append(self.centroids)
        return params


def _stack_forward(
    x: Node,
    blocks: List[ResidualBlockParams],
    model: ViewModel,
    mode: Mode,
    tape: GradientTape,
    rng: Optional[np.random.Generator],
) -> Node:
    for block in blocks:
        x = residual_block_forward(
            x, block, tape, dropout=model.config.dropout, mode=mode, rng=rng
        )
    return x


def encode(
    x: Union[Node, np.ndarray],
    model: ViewModel,
    mode: Mode,
    tape: GradientTape,
    rng: Optional[np.random.Generator] = None,
) -> Node:
    """
    Map series to latent codes

    Parameters:
        x (Union[Node, np.ndarray]): Batch (n, L) or a single series (L,)
        model (ViewModel): View model
        mode (Mode): TRAIN enables dropout
        tape (GradientTape): Tape to record on
        rng (Optional[np.random.Generator]): Dropout stream for TRAIN mode

    Returns:
        Node: Latent codes (n, d) or (d,)

    Raises:
        ShapeError: If the series length is not L
    """
    if not isinstance(x, Node):
        x = tape.constant(x)
    if x.shape[-1] != model.input_length:
        raise ShapeError(
            f"model expects series of length {model.input_length}, got {x.shape[-1]}"
        )
    return _stack_forward(x, model.encoder, model, mode, tape, rng)


def decode(
    z: Union[Node, np.ndarray],
    model: ViewModel,
    mode: Mode,
    tape: GradientTape,
    rng: Optional[np.random.Generator] = None,
) -> Node:
    """
    Reconstruct series directly from latent codes, all time steps at once

    Parameters:
        z (Union[Node, np.ndarray]): Latent codes (n, d) or (d,)
        model (ViewModel): View model
        mode (Mode): TRAIN enables dropout
        tape (GradientTape): Tape to record on
        rng (Optional[np.random.Generator]): Dropout stream for TRAIN mode

    Returns:
        Node: Reconstructions (n, L) or (L,)

    Raises:
        ShapeError: If the code width is not d
    """
    if not isinstance(z, Node):
        z = tape.constant(z)
    if z.shape[-1] != model.hidden_dim:
        raise ShapeError(
            f"model expects codes of width {model.hidden_dim}, got {z.shape[-1]}"
        )
    return _stack_forward(z, model.decoder, model, mode, tape, rng)


def embed(model: ViewModel, series: np.ndarray) -> np.ndarray:
    """
    Latent codes of a whole dataset in evaluation mode

    Parameters:
        model (ViewModel): View model
        series (np.ndarray): Matrix (n, L)

    Returns:
        np.ndarray: Matrix (n, d)
    """
    tape = GradientTape()
    return encode(series, model, Mode.EVAL, tape).value
