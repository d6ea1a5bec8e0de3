import numpy as np

from loster.dataio.dataset import TimeSeriesDataset

STD_GUARD = 1e-12


def znorm(x: np.ndarray) -> np.ndarray:
    """
    Standardize one series to zero mean and unit population std

    A series whose std is below 1e-12 maps to zeros.

    Parameters:
        x (np.ndarray): Series (L,)

    Returns:
        np.ndarray: Normalized series (L,)
    """
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean()
    std = x.std()
    if std < STD_GUARD:
        return np.zeros_like(x)
    return centered / std


def znorm_dataset(dataset: TimeSeriesDataset) -> TimeSeriesDataset:
    """Normalize every series of a dataset individually"""
    return dataset.with_series(np.vstack([znorm(row) for row in dataset.series]))
