"""Long-sequence time series clustering with a two-view dense autoencoder."""

__version__ = "0.1.0"
