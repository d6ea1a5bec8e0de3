"""
Partition agreement scores: Rand Index and Normalized Mutual Information
"""

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from loster.errors import InvalidArgumentError


@dataclass(frozen=True)
class ContingencyTable:
    """
    Joint counts of two labelings

    Attributes:
        counts (np.ndarray): counts[i, j] = |G_i ∩ A_j|
        truth_sizes (np.ndarray): |G_i|, row sums
        predicted_sizes (np.ndarray): |A_j|, column sums
        total (int): Number of samples N
    """

    counts: np.ndarray
    truth_sizes: np.ndarray
    predicted_sizes: np.ndarray
    total: int


def _as_labels(labels: Sequence) -> np.ndarray:
    return np.asarray(labels).reshape(-1)


def contingency(truth: Sequence, predicted: Sequence) -> ContingencyTable:
    """
    Count co-occurrences of ground-truth and predicted clusters

    Label values are arbitrary; rows and columns follow the sorted distinct
    values of each labeling.

    Parameters:
        truth (Sequence): Ground-truth labels G
        predicted (Sequence): Predicted labels A

    Returns:
        ContingencyTable: Exact joint counts and marginals

    Raises:
        InvalidArgumentError: If the lengths differ
    """
    truth, predicted = _as_labels(truth), _as_labels(predicted)
    if truth.shape != predicted.shape:
        raise InvalidArgumentError(
            f"label sequences differ in length: {truth.size} vs {predicted.size}"
        )
    _, truth_ids = np.unique(truth, return_inverse=True)
    _, predicted_ids = np.unique(predicted, return_inverse=True)
    counts = np.zeros(
        (truth_ids.max(initial=-1) + 1, predicted_ids.max(initial=-1) + 1),
        dtype=np.int64,
    )
    np.add.at(counts, (truth_ids.reshape(-1), predicted_ids.reshape(-1)), 1)
    return ContingencyTable(
        counts, counts.sum(axis=1), counts.sum(axis=0), int(truth.size)
    )


def _pairs(values: np.ndarray) -> int:
    return int(np.sum(values * (values - 1) // 2))


def rand_index(truth: Sequence, predicted: Sequence) -> float:
    """
    Fraction of sample pairs on which the two partitions agree

    Parameters:
        truth (Sequence): Ground-truth labels
        predicted (Sequence): Predicted labels

    Returns:
        float: (TP + TN) / (n(n-1)/2) in [0, 1]

    Raises:
        InvalidArgumentError: If lengths differ or n < 2
    """
    table = contingency(truth, predicted)
    if table.total < 2:
        raise InvalidArgumentError("rand index needs at least two samples")
    all_pairs = table.total * (table.total - 1) // 2
    together_both = _pairs(table.counts)
    together_truth = _pairs(table.truth_sizes)
    together_predicted = _pairs(table.predicted_sizes)
    apart_both = all_pairs - together_truth - together_predicted + together_both
    return (together_both + apart_both) / all_pairs


def _entropy_mass(sizes: np.ndarray, total: int) -> float:
    sizes = sizes[sizes > 0].astype(np.float64)
    return float(-np.sum(sizes * np.log(sizes / total)))


def nmi(truth: Sequence, predicted: Sequence) -> float:
    """
    Mutual information normalized by the geometric mean of the entropies

    Returns 0 when either partition has a single cluster.

    Parameters:
        truth (Sequence): Ground-truth labels
        predicted (Sequence): Predicted labels

    Returns:
        float: NMI in [0, 1]

    Raises:
        InvalidArgumentError: If lengths differ or there are no samples
    """
    table = contingency(truth, predicted)
    if table.total < 1:
        raise InvalidArgumentError("nmi needs at least one sample")
    truth_mass = _entropy_mass(table.truth_sizes, table.total)
    predicted_mass = _entropy_mass(table.predicted_sizes, table.total)
    if truth_mass <= 0.0 or predicted_mass <= 0.0:
        return 0.0

    rows, cols = np.nonzero(table.counts)
    joint = table.counts[rows, cols].astype(np.float64)
    outer = table.truth_sizes[rows].astype(np.float64) * table.predicted_sizes[cols]
    mutual = float(np.sum(joint * np.log(table.total * joint / outer)))
    score = mutual / np.sqrt(truth_mass * predicted_mass)
    return float(min(max(score, 0.0), 1.0))


def evaluate(truth: Sequence, predicted: Sequence) -> Dict[str, float]:
    """
    Both clustering scores at once

    Returns:
        Dict[str, float]: {"ri": ..., "nmi": ...}
    """
    return {"ri": rand_index(truth, predicted), "nmi": nmi(truth, predicted)}
