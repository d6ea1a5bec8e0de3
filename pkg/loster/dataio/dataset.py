from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from loster.errors import ShapeError

Label = Union[int, str]


def _label_order(label: Label):
    return (isinstance(label, str), label)


@dataclass
class TimeSeriesDataset:
    """
    Equal-length univariate series with optional ground-truth labels

    Labels are kept for evaluation only; training consumes `series` alone.

    Attributes:
        series (np.ndarray): Matrix (n, L)
        raw_labels (Optional[List[Label]]): Class identifiers as read
        name (str): Dataset identifier
        provenance (List[str]): Files the rows were read from, in order
    """

    series: np.ndarray
    raw_labels: Optional[List[Label]] = None
    name: str = "dataset"
    provenance: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.series = np.asarray(self.series, dtype=np.float64)
        if self.series.ndim != 2:
            raise ShapeError(
                f"series must form an n x L matrix, got {self.series.shape}"
            )
        if self.raw_labels is not None:
            self.raw_labels = list(self.raw_labels)
            if len(self.raw_labels) != self.n:
                raise ShapeError(f"{len(self.raw_labels)} labels for {self.n} series")

    @property
    def n(self) -> int:
        return self.series.shape[0]

    @property
    def length(self) -> int:
        return self.series.shape[1]

    @property
    def classes(self) -> List[Label]:
        """Distinct labels in the order of their dense ids"""
        if self.raw_labels is None:
            return []
        return sorted(set(self.raw_labels), key=_label_order)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def labels(self) -> Optional[np.ndarray]:
        """Labels mapped to dense ids 0..n_classes-1, None when unlabeled"""
        if self.raw_labels is None:
            return None
        index = {label: i for i, label in enumerate(self.classes)}
        return np.array([index[label] for label in self.raw_labels], dtype=np.int64)

    def with_series(self, series: np.ndarray) -> "TimeSeriesDataset":
        """Copy of the dataset holding other values for the same rows"""
        return TimeSeriesDataset(
            series, self.raw_labels, self.name, list(self.provenance)
        )


def concat(parts: Sequence[TimeSeriesDataset], name: str) -> TimeSeriesDataset:
    """
    Stack datasets row-wise, keeping their order

    Raises:
        ShapeError: If the series lengths differ
    """
    lengths = {part.length for part in parts}
    if len(lengths) > 1:
        raise ShapeError(f"cannot merge series of lengths {sorted(lengths)}")
    labeled = all(part.raw_labels is not None for part in parts)
    labels: Optional[List[Label]] = None
    if labeled:
        labels = [label for part in parts for label in part.raw_labels]
    return TimeSeriesDataset(
        np.vstack([part.series for part in parts]),
        labels,
        name,
        [path for part in parts for path in part.provenance],
    )
