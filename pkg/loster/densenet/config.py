from dataclasses import dataclass

from loster.errors import ConfigError


@dataclass(frozen=True)
class NetConfig:
    """
    Architecture of one view's autoencoder

    Attributes:
        n_enc (int): Residual blocks in the encoder
        n_dec (int): Residual blocks in the decoder
        hidden_dim (int): Latent size d, also the hidden width of every block
        dropout (float): Dropout probability inside each block
        layer_norm (bool): Apply layer normalization at the end of each block
        output_layer_norm (bool): Also normalize the last decoder block
    """

    n_enc: int = 3
    n_dec: int = 3
    hidden_dim: int = 256
    dropout: float = 0.1
    layer_norm: bool = True
    output_layer_norm: bool = False

    def __post_init__(self) -> None:
        if self.n_enc < 1 or self.n_dec < 1:
            raise ConfigError("encoder and decoder need at least one block each")
        if self.hidden_dim < 1:
            raise ConfigError("hidden_dim must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
