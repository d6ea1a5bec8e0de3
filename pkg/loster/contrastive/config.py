from dataclasses import dataclass

from loster.errors import ConfigError


@dataclass(frozen=True)
class ContrastiveConfig:
    """
    Temperatures of the instance- and cluster-level contrastive losses

    Attributes:
        tau_i (float): Instance temperature
        tau_c (float): Cluster temperature
        exclude_self (bool): Use the conventional NT-Xent denominator, which
            drops the self-similarity term and keeps the positive pair
    """

    tau_i: float = 1.0
    tau_c: float = 1.0
    exclude_self: bool = False

    def __post_init__(self) -> None:
        if self.tau_i <= 0 or self.tau_c <= 0:
            raise ConfigError("contrastive temperatures must be positive")
