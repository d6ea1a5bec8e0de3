"""
Augmentation function producing the second view of every series

Applied in fixed order: rotation (for univariate series a sign flip),
segment permutation, time warping.
"""

import logging

import numpy as np

from loster.augment.config import AugmentConfig
from loster.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

MIN_WARP_SPEED = 0.05


def rotate_sign(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Flip the sign of the whole series with probability 1/2"""
    return -x if rng.random() < 0.5 else x.copy()


def permute_segments(
    x: np.ndarray, n_segments: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Split into contiguous segments and concatenate them in random order

    Segment i spans [floor(i*L/n_segments), floor((i+1)*L/n_segments)).

    Parameters:
        x (np.ndarray): Series (L,)
        n_segments (int): Number of segments, 1 <= n_segments <= L
        rng (np.random.Generator): Stream for the segment order

    Returns:
        np.ndarray: Permuted series (L,)

    Raises:
        InvalidArgumentError: If n_segments is outside [1, L]
    """
    length = len(x)
    if not 1 <= n_segments <= length:
        raise InvalidArgumentError(
            f"n_segments must be between 1 and the series length {length}"
        )
    bounds = [(i * length) // n_segments for i in range(n_segments + 1)]
    segments = [x[bounds[i] : bounds[i + 1]] for i in range(n_segments)]
    order = rng.permutation(n_segments)
    return np.concatenate([segments[i] for i in order])


def time_warp(
    x: np.ndarray, warp_knots: int, warp_sigma: float, rng: np.random.Generator
) -> np.ndarray:
    """
    Distort the time axis with a random monotone warp pinned at both ends

    Speeds drawn around 1 at evenly spaced knots are interpolated linearly
    over the series, accumulated into warped time stamps rescaled to
    [0, L - 1], and the series is resampled at the original stamps.

    Parameters:
        x (np.ndarray): Series (L,)
        warp_knots (int): Number of knots, at least 2 and at most L
        warp_sigma (float): Standard deviation of the speed noise
        rng (np.random.Generator): Stream for the speeds

    Returns:
        np.ndarray: Warped series (L,) with the same first and last values

    Raises:
        InvalidArgumentError: If L < warp_knots
    """
    length = len(x)
    if length < warp_knots:
        raise InvalidArgumentError(
            f"series of length {length} is shorter than warp_knots={warp_knots}"
        )
    stamps = np.arange(length, dtype=np.float64)
    knots = np.linspace(0.0, length - 1.0, warp_knots)
    speeds = np.maximum(rng.normal(1.0, warp_sigma, size=warp_knots), MIN_WARP_SPEED)
    cumulative = np.cumsum(np.interp(stamps, knots, speeds))
    span = cumulative[-1] - cumulative[0]
    if span <= 0:
        return x.copy()
    warped = (cumulative - cumulative[0]) / span * (length - 1.0)
    return np.interp(stamps, warped, x)


def augment(x: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Apply every enabled transform in order: rotation, permutation, warping

    Parameters:
        x (np.ndarray): Series (L,)
        cfg (AugmentConfig): Which transforms to apply and their settings
        rng (np.random.Generator): Stream for this series

    Returns:
        np.ndarray: Augmented series (L,)

    Raises:
        InvalidArgumentError: If the series is shorter than warp_knots or
            n_segments of an enabled transform
    """
    x = np.asarray(x, dtype=np.float64)
    if cfg.enable_permutation and len(x) < cfg.n_segments:
        raise InvalidArgumentError(
            f"series of length {len(x)} is shorter than n_segments={cfg.n_segments}"
        )
    if cfg.enable_timewarp and len(x) < cfg.warp_knots:
        raise InvalidArgumentError(
            f"series of length {len(x)} is shorter than warp_knots={cfg.warp_knots}"
        )
    result = x.copy()
    if cfg.enable_rotation:
        result = rotate_sign(result, rng)
    if cfg.enable_permutation:
        result = permute_segments(result, cfg.n_segments, rng)
    if cfg.enable_timewarp:
        result = time_warp(result, cfg.warp_knots, cfg.warp_sigma, rng)
    return result


def augment_dataset(series: np.ndarray, cfg: AugmentConfig) -> np.ndarray:
    """
    Augment every row once, each with its own stream default_rng([seed, index])

    Parameters:
        series (np.ndarray): Matrix (n, L)
        cfg (AugmentConfig): Augmentation settings, seed included

    Returns:
        np.ndarray: Augmented matrix (n, L)
    """
    series = np.asarray(series, dtype=np.float64)
    augmented = np.empty_like(series)
    for index, row in enumerate(series):
        augmented[index] = augment(row, cfg, np.random.default_rng([cfg.seed, index]))
    logger.debug("augmented %d series with %s", len(series), cfg)
    return augmented
