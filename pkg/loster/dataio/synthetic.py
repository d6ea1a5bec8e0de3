import math

import numpy as np

from loster.dataio.dataset import TimeSeriesDataset
from loster.errors import InvalidArgumentError


def gen_synthetic(
    n_per_class: int,
    length: int,
    k: int,
    noise_std: float,
    rng: np.random.Generator,
    phase_range: float = math.pi / 4,
) -> TimeSeriesDataset:
    """
    Sinusoid classes that differ in frequency

    Class c is sin(2*pi*(c + 1)*t/L + phase) with phase uniform in
    [0, phase_range), plus white noise of scale noise_std. Rows are grouped
    by class.

    Parameters:
        n_per_class (int): Series per class
        length (int): Series length L, at least 8
        k (int): Number of classes, at least 1
        noise_std (float): Noise scale
        rng (np.random.Generator): Stream for phases and noise
        phase_range (float): Width of the phase interval

    Returns:
        TimeSeriesDataset: k * n_per_class labeled series

    Raises:
        InvalidArgumentError: If k < 1, L < 8 or n_per_class < 1
    """
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    if length < 8:
        raise InvalidArgumentError("series length must be at least 8")
    if n_per_class < 1:
        raise InvalidArgumentError("n_per_class must be at least 1")
    if noise_std < 0:
        raise InvalidArgumentError("noise_std must be non-negative")
    t = np.arange(length, dtype=np.float64)
    rows, labels = [], []
    for c in range(k):
        phases = rng.uniform(0.0, phase_range, size=n_per_class)
        waves = np.sin(2.0 * np.pi * (c + 1) * t / length + phases[:, np.newaxis])
        rows.append(waves + rng.normal(0.0, noise_std, size=waves.shape))
        labels += [c] * n_per_class
    return TimeSeriesDataset(np.vstack(rows), labels, "synthetic")
