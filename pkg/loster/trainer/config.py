from dataclasses import dataclass, fields
from typing import Any, Dict, Tuple

from loster.concrete import ClusterConfig
from loster.contrastive import ContrastiveConfig
from loster.densenet import NetConfig
from loster.errors import ConfigError


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters of the whole training procedure

    Defaults are the reported settings: three residual blocks per stack,
    Adam at 1e-3 for 50 pretraining epochs per view, SGD at 1e-2 decayed by
    0.1 every 5 epochs, tau annealed from 10 by 0.65 per epoch down to 0.01,
    batches of 128, stop when fewer than 0.1% of the labels change.
    """

    pretrain_epochs: int = 50
    pretrain_lr: float = 1e-3
    joint_lr: float = 1e-2
    lr_decay: float = 0.1
    lr_decay_every: int = 5
    tau0: float = 10.0
    beta: float = 0.65
    tau_floor: float = 0.01
    tau_i: float = 1.0
    tau_c: float = 1.0
    exclude_self: bool = False
    batch_size: int = 128
    max_epochs: int = 100
    stop_fraction: float = 0.001
    seed: int = 0
    sigma: float = 1.0
    n_enc: int = 3
    n_dec: int = 3
    hidden_dim: int = 256
    dropout: float = 0.1
    layer_norm: bool = True
    output_layer_norm: bool = False
    lloyd_iterations: int = 10
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    momentum: float = 0.0
    progress: bool = True

    def __post_init__(self) -> None:
        positive = ("pretrain_lr", "joint_lr", "tau0", "tau_floor", "sigma", "adam_eps")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("pretrain_epochs", "max_epochs", "lloyd_iterations"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.batch_size < 1 or self.lr_decay_every < 1:
            raise ConfigError("batch_size and lr_decay_every must be at least 1")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ConfigError("lr_decay must be in (0, 1]")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError("beta must be in (0, 1]")
        if not 0.0 < self.stop_fraction < 1.0:
            raise ConfigError("stop_fraction must be in (0, 1)")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ConfigError("Adam betas must be in [0, 1)")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        # the nested configs validate the remaining fields
        self.net_config()
        self.contrastive_config()

    @property
    def adam_betas(self) -> Tuple[float, float]:
        return self.adam_beta1, self.adam_beta2

    def net_config(self) -> NetConfig:
        return NetConfig(
            n_enc=self.n_enc,
            n_dec=self.n_dec,
            hidden_dim=self.hidden_dim,
            dropout=self.dropout,
            layer_norm=self.layer_norm,
            output_layer_norm=self.output_layer_norm,
        )

    def cluster_config(self, k: int) -> ClusterConfig:
        return ClusterConfig(
            k=k, sigma=self.sigma, tau=self.tau0, tau_floor=self.tau_floor
        )

    def contrastive_config(self) -> ContrastiveConfig:
        return ContrastiveConfig(
            tau_i=self.tau_i, tau_c=self.tau_c, exclude_self=self.exclude_self
        )

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}
