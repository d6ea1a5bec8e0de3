from dataclasses import dataclass

from loster.errors import ConfigError


@dataclass(frozen=True)
class ClusterConfig:
    """
    Settings of the differentiable clustering layer

    Attributes:
        k (int): Number of clusters
        sigma (float): RBF bandwidth, shared by both views
        tau (float): Initial Gumbel-softmax temperature
        tau_floor (float): Lowest temperature reached by annealing
    """

    k: int
    sigma: float = 1.0
    tau: float = 10.0
    tau_floor: float = 0.01

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.tau <= 0 or self.tau_floor <= 0:
            raise ConfigError("temperatures must be positive")
