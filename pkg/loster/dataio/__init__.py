from .dataset import TimeSeriesDataset, concat
from .normalize import STD_GUARD, znorm, znorm_dataset
from .ucr import load_ucr, parse_label, read_ucr_file, write_ucr
from .synthetic import gen_synthetic
from .results import (
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
