"""
Run result files

A run writes a JSON results file (schema version 1), a flat CSV of final
labels next to it, and a per-epoch training log CSV.
"""

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from loster.dataio.ucr import parse_label
from loster.errors import DataFormatError

PathLike = Union[str, Path]

SCHEMA_VERSION = 1

TRAINING_LOG_COLUMNS = (
    "epoch",
    "tau",
    "lr",
    "loss_rec",
    "loss_kmeans",
    "loss_instance",
    "loss_cluster",
    "loss_total",
    "changed_fraction",
    "seconds",
)


@dataclass
class RunRecord:
    """
    Everything a clustering run reports

    Attributes:
        dataset (str): Dataset name
        seed (int): Seed the run was started with
        config (Dict[str, Any]): Echo of the effective configuration
        labels (List[int]): Final cluster id per series
        history (List[Dict[str, float]]): One entry per joint epoch
        ri (Optional[float]): Rand index against ground truth, if known
        nmi (Optional[float]): NMI against ground truth, if known
        timings (Dict[str, float]): Wall-clock seconds per phase
    """

    dataset: str
    seed: int
    config: Dict[str, Any]
    labels: List[int]
    history: List[Dict[str, float]] = field(default_factory=list)
    ri: Optional[float] = None
    nmi: Optional[float] = None
    timings: Dict[str, float] = field(default_factory=dict)


def labels_path_for(results_path: PathLike) -> Path:
    """Where the labels CSV of a results file lives"""
    results_path = Path(results_path)
    return results_path.with_name(results_path.stem + "_labels.csv")


def save_results(run: RunRecord, path: PathLike) -> Tuple[Path, Path]:
    """
    Write the results JSON and the labels CSV next to it

    Parameters:
        run (RunRecord): Run to persist
        path (PathLike): JSON file path

    Returns:
        Tuple[Path, Path]: Paths of the JSON and CSV files
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"schema_version": SCHEMA_VERSION}
    document.update(dataclasses.asdict(run))
    document["labels"] = [int(label) for label in run.labels]
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)
    labels_path = write_labels(run.labels, labels_path_for(path))
    return path, labels_path


def load_results(path: PathLike) -> RunRecord:
    """
    Read a results JSON written by save_results

    Raises:
        DataFormatError: On unreadable JSON, an unknown schema version or
            missing fields
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as error:
        raise DataFormatError(f"{path}: invalid JSON ({error.msg})", error.lineno)
    if document.get("schema_version") != SCHEMA_VERSION:
        raise DataFormatError(
            f"{path}: unsupported schema version {document.get('schema_version')!r}"
        )
    names = [f.name for f in dataclasses.fields(RunRecord)]
    required = ("dataset", "seed", "config", "labels")
    missing = [name for name in required if name not in document]
    if missing:
        raise DataFormatError(f"{path}: missing fields {', '.join(missing)}")
    return RunRecord(**{name: document[name] for name in names if name in document})


def write_labels(labels: Iterable[Any], path: PathLike) -> Path:
    """Write labels as an index,label CSV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "label"])
        for index, label in enumerate(labels):
            writer.writerow([index, label])
    return path


def read_labels(path: PathLike) -> List[Any]:
    """
    Read a label file

    Accepts the index,label CSV written by write_labels and plain files with
    one label per line. A header row is skipped.

    Raises:
        DataFormatError: On rows with more than two fields or an empty file
    """
    labels: List[Any] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for number, row in enumerate(csv.reader(handle), start=1):
            row = [cell.strip() for cell in row]
            if not row or all(cell == "" for cell in row):
                continue
            if number == 1 and row[-1].lower() == "label":
                continue
            if len(row) > 2:
                raise DataFormatError(f"{path}: expected index,label", number)
            labels.append(parse_label(row[-1]))
    if not labels:
        raise DataFormatError(f"{path}: no labels found")
    return labels


def _log_row(record: Any) -> Mapping[str, Any]:
    if dataclasses.is_dataclass(record):
        return dataclasses.asdict(record)
    return record


def write_training_log(records: Iterable[Any], path: PathLike) -> Path:
    """
    Write one CSV row per joint epoch

    Parameters:
        records (Iterable[Any]): Epoch records, dataclasses or mappings with
            the TRAINING_LOG_COLUMNS keys
        path (PathLike): CSV path

    Returns:
        Path: The written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=TRAINING_LOG_COLUMNS, extrasaction="ignore"
        )
        writer.writeheader()
        for record in records:
            writer.writerow(_log_row(record))
    return path


def read_training_log(path: PathLike) -> List[Dict[str, float]]:
    """Read a training log back as floats (epoch as int)"""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = list(csv.DictReader(handle))
    return [
        {
            key: int(value) if key == "epoch" else float(value)
            for key, value in row.items()
        }
        for row in rows
    ]


def labels_array(labels: Iterable[Any]) -> np.ndarray:
    """Labels as a 1-D array with int dtype when every label is an int"""
    labels = list(labels)
    if all(isinstance(label, (int, np.integer)) for label in labels):
        return np.array(labels, dtype=np.int64)
    return np.array([str(label) for label in labels])
