"""
UCR archive text format

One series per line: the class label followed by the L values, separated by
tabs (comma-separated and whitespace-separated variants are accepted through
the delimiter argument; None splits on any whitespace).
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from loster.dataio.dataset import Label, TimeSeriesDataset, concat
from loster.errors import DataFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def parse_label(text: str) -> Label:
    """
    Integral numeric labels become ints, anything else stays a string
    """
    text = text.strip()
    try:
        number = float(text)
    except ValueError:
        return text
    if np.isfinite(number) and number == int(number):
        return int(number)
    return text


def _split(line: str, delimiter: Optional[str]) -> List[str]:
    fields = line.strip().split(delimiter)
    return [field for field in fields if field != ""] if delimiter is None else fields


def read_ucr_file(
    path: PathLike, delimiter: Optional[str] = "\t"
) -> Tuple[np.ndarray, List[Label]]:
    """
    Parse one UCR file

    Parameters:
        path (PathLike): File to read
        delimiter (Optional[str]): Field separator

    Returns:
        Tuple[np.ndarray, List[Label]]: Values (n, L) and labels

    Raises:
        DataFormatError: On an empty file, ragged rows, non-numeric or
            non-finite values; the message names the line
    """
    rows: List[List[float]] = []
    labels: List[Label] = []
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            fields = _split(line, delimiter)
            if len(fields) < 2:
                raise DataFormatError(f"{path}: a row needs a label and values", number)
            try:
                values = [float(field) for field in fields[1:]]
            except ValueError as error:
                raise DataFormatError(f"{path}: non-numeric value ({error})", number)
            if not np.all(np.isfinite(values)):
                raise DataFormatError(f"{path}: non-finite value", number)
            if rows and len(values) != len(rows[0]):
                raise DataFormatError(
                    f"{path}: expected {len(rows[0])} values, found {len(values)}",
                    number,
                )
            rows.append(values)
            labels.append(parse_label(fields[0]))
    if not rows:
        raise DataFormatError(f"{path}: file contains no series")
    return np.array(rows, dtype=np.float64), labels


def _dataset_name(path: PathLike) -> str:
    stem = Path(path).stem
    for suffix in ("_TRAIN", "_TEST"):
        if stem.upper().endswith(suffix):
            return stem[: -len(suffix)]
    return stem


def load_ucr(
    train_path: PathLike,
    test_path: Optional[PathLike] = None,
    delimiter: Optional[str] = "\t",
    name: Optional[str] = None,
) -> TimeSeriesDataset:
    """
    Load a UCR dataset, merging the train and test partitions

    Parameters:
        train_path (PathLike): Train partition
        test_path (Optional[PathLike]): Test partition appended after train
        delimiter (Optional[str]): Field separator
        name (Optional[str]): Dataset name, derived from the file name if omitted

    Returns:
        TimeSeriesDataset: Rows in file order, train first

    Raises:
        DataFormatError: On malformed input or partitions of different lengths
    """
    name = name or _dataset_name(train_path)
    parts = []
    for path in [train_path] + ([test_path] if test_path is not None else []):
        values, labels = read_ucr_file(path, delimiter)
        parts.append(TimeSeriesDataset(values, labels, name, [str(path)]))
    if len(parts) > 1 and parts[0].length != parts[1].length:
        raise DataFormatError(
            f"{test_path}: series length {parts[1].length} differs from "
            f"train length {parts[0].length}",
            1,
        )
    dataset = concat(parts, name)
    logger.info(
        "loaded %s: %d series of length %d, %d classes",
        name,
        dataset.n,
        dataset.length,
        dataset.n_classes,
    )
    return dataset


def write_ucr(
    dataset: TimeSeriesDataset, path: PathLike, delimiter: str = "\t"
) -> Path:
    """
    Write a dataset in UCR format, values with round-trip precision

    Unlabeled datasets get label 0 on every row.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = dataset.raw_labels or [0] * dataset.n
    with open(path, "w", encoding="utf-8") as handle:
        for label, row in zip(labels, dataset.series):
            handle.write(delimiter.join([str(label)] + [repr(float(v)) for v in row]))
            handle.write("\n")
    return path
