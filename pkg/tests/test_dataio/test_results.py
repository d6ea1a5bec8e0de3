import pytest
import sys
import os
import json

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

from loster.dataio import (
    SCHEMA_VERSION,
    TRAINING_LOG_COLUMNS,
    RunRecord,
    labels_array,
    labels_path_for,
    load_results,
    read_labels,
    read_training_log,
    save_results,
    write_labels,
    write_training_log,
)
from loster.errors import DataFormatError


def make_record():
    return RunRecord(
        dataset="Toy",
        seed=3,
        config={"k": 2, "tau0": 10.0},
        labels=[0, 1, 1, 0],
        history=[{"epoch": 0, "loss_total": 1.5}],
        ri=0.8333333333333334,
        nmi=0.1234567890123,
        timings={"pretrain": 0.5, "joint": 1.25},
    )


class TestResults:
    """
    Test cases for the results JSON and its labels CSV.

    Test cases:
    - Writing then reading reproduces every field, RI and NMI exactly
    - The seed and schema version are stored
    - Invalid JSON, a wrong schema version and missing fields are rejected
    """

    def test_round_trip(self, tmp_path):
        """Test save_results followed by load_results."""
        record = make_record()
        json_path, labels_path = save_results(record, tmp_path / "results.json")
        assert labels_path == tmp_path / "results_labels.csv"
        loaded = load_results(json_path)
        assert loaded == record
        assert loaded.ri == record.ri and loaded.nmi == record.nmi
        assert read_labels(labels_path) == [0, 1, 1, 0]

    def test_document(self, tmp_path):
        """Test the stored seed and schema version."""
        json_path, _ = save_results(make_record(), tmp_path / "out" / "results.json")
        document = json.loads(json_path.read_text(encoding="utf-8"))
        assert document["schema_version"] == SCHEMA_VERSION
        assert document["seed"] == 3

    def test_invalid_json(self, tmp_path):
        """Test a truncated document."""
        path = tmp_path / "bad.json"
        path.write_text('{"schema_version": 1,', encoding="utf-8")
        with pytest.raises(DataFormatError):
            load_results(path)

    def test_schema_version(self, tmp_path):
        """Test an unknown schema version."""
        path = tmp_path / "v2.json"
        path.write_text(json.dumps({"schema_version": 2}), encoding="utf-8")
        with pytest.raises(DataFormatError):
            load_results(path)

    def test_missing_fields(self, tmp_path):
        """Test a document without labels."""
        path = tmp_path / "partial.json"
        document = {"schema_version": 1, "dataset": "x", "seed": 0, "config": {}}
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(DataFormatError) as info:
            load_results(path)
        assert "labels" in str(info.value)


def test_labels_path_for():
    """
    Test the labels CSV name.
    """
    assert labels_path_for("runs/a/results.json").name == "results_labels.csv"


class TestLabels:
    """
    Test cases for label files.

    Test cases:
    - Identical label sequences give byte-identical files
    - One-column files, headerless files and string labels
    - Empty and malformed files
    """

    def test_byte_identical(self, tmp_path):
        """Test determinism of the CSV writer."""
        first = write_labels([2, 0, 1], tmp_path / "a.csv")
        second = write_labels([2, 0, 1], tmp_path / "b.csv")
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text(encoding="utf-8").splitlines()[0] == "index,label"

    def test_formats(self, tmp_path):
        """Test one-column and headerless variants."""
        single = tmp_path / "single.txt"
        single.write_text("label\n1\n2\n\n1\n", encoding="utf-8")
        assert read_labels(single) == [1, 2, 1]
        plain = tmp_path / "plain.csv"
        plain.write_text("0,a\n1,b\n", encoding="utf-8")
        assert read_labels(plain) == ["a", "b"]

    def test_errors(self, tmp_path):
        """Test an empty file and a row with three fields."""
        empty = tmp_path / "empty.csv"
        empty.write_text("index,label\n", encoding="utf-8")
        with pytest.raises(DataFormatError):
            read_labels(empty)
        wide = tmp_path / "wide.csv"
        wide.write_text("0,1,2\n", encoding="utf-8")
        with pytest.raises(DataFormatError):
            read_labels(wide)

    def test_labels_array(self):
        """Test integer and mixed label arrays."""
        assert labels_array([1, 2]).dtype == np.int64
        assert list(labels_array([1, "a"])) == ["1", "a"]


def test_training_log(tmp_path):
    """
    Test the training log CSV.

    Test cases:
    - The header lists every column in order
    - Mappings with extra keys are accepted
    - Values read back as numbers
    """
    row = {column: 0.5 for column in TRAINING_LOG_COLUMNS}
    row["epoch"] = 0
    row["extra"] = "ignored"
    path = write_training_log([row, dict(row, epoch=1)], tmp_path / "log.csv")
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(TRAINING_LOG_COLUMNS)
    rows = read_training_log(path)
    assert [r["epoch"] for r in rows] == [0, 1]
    assert rows[1]["tau"] == 0.5
