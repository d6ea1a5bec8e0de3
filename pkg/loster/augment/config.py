from dataclasses import dataclass

from loster.errors import ConfigError


@dataclass(frozen=True)
class AugmentConfig:
    """
    Composition of the augmentations producing the second view

    Attributes:
        enable_rotation (bool): Global sign flip with probability 1/2
        enable_permutation (bool): Shuffle contiguous segments
        n_segments (int): Number of segments for the permutation
        enable_timewarp (bool): Smooth monotone time-axis distortion
        warp_knots (int): Control points of the warp speed curve
        warp_sigma (float): Scale of the multiplicative speed noise
        seed (int): Master seed of the per-series streams
    """

    enable_rotation: bool = True
    enable_permutation: bool = True
    n_segments: int = 4
    enable_timewarp: bool = True
    warp_knots: int = 4
    warp_sigma: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_segments < 1:
            raise ConfigError("n_segments must be at least 1")
        if self.warp_knots < 2:
            raise ConfigError("warp_knots must be at least 2")
        if self.warp_sigma < 0:
            raise ConfigError("warp_sigma must be non-negative")
