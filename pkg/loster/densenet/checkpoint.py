"""
ViewModel checkpoints

A checkpoint is a numpy `.npz` archive. The entry `__header__` holds a JSON
document:

    {"format_version": 1, "view": "original", "input_length": L,
     "k": k or null, "config": {NetConfig fields}, "parameters": [names]}

and every other entry is one parameter array stored under its name.
"""

import dataclasses
import json
import logging
from pathlib import Path
from typing import Union

import numpy as np

from loster.densenet.config import NetConfig
from loster.densenet.model import ViewModel
from loster.enums import ViewTag
from loster.errors import DataFormatError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER_KEY = "__header__"


def save_checkpoint(model: ViewModel, path: Union[str, Path]) -> Path:
    """
    Write all parameters of a view model

    Parameters:
        model (ViewModel): Model to save
        path (Union[str, Path]): Target file, `.npz` is appended if missing

    Returns:
        Path: The file written
    """
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(".npz")
    path.parent.mkdir(parents=True, exist_ok=True)
    params = model.parameters()
    header = {
        "format_version": FORMAT_VERSION,
        "view": model.view.value,
        "input_length": model.input_length,
        "k": model.k,
        "config": dataclasses.asdict(model.config),
        "parameters": [param.name for param in params],
    }
    arrays = {param.name: param.value for param in params}
    arrays[HEADER_KEY] = np.array(json.dumps(header, sort_keys=True))
    np.savez(path, **arrays)
    logger.info("saved %s view checkpoint to %s", model.view.value, path)
    return path


def load_checkpoint(path: Union[str, Path]) -> ViewModel:
    """
    Read a view model written by save_checkpoint

    Parameters:
        path (Union[str, Path]): Checkpoint file

    Returns:
        ViewModel: Restored model, centroids included when saved

    Raises:
        DataFormatError: If the header or an array is missing or inconsistent
    """
    with np.load(Path(path), allow_pickle=False) as archive:
        if HEADER_KEY not in archive:
            raise DataFormatError(f"{path} is not a loster checkpoint")
        header = json.loads(str(archive[HEADER_KEY]))
        if header.get("format_version") != FORMAT_VERSION:
            raise DataFormatError(
                f"unsupported checkpoint version {header.get('format_version')}"
            )
        config = NetConfig(**header["config"])
        model = ViewModel.create(
            header["input_length"],
            config,
            ViewTag(header["view"]),
            np.random.default_rng(0),
        )
        centroid_name = f"{model.view.value}.centroids"
        if header.get("k") is not None:
            model.set_centroids(archive[centroid_name])
        for param in model.parameters():
            if param.name not in archive:
                raise DataFormatError(f"checkpoint misses parameter {param.name}")
            stored = archive[param.name]
            if stored.shape != param.shape:
                raise DataFormatError(
                    f"{param.name}: stored shape {stored.shape}, expected {param.shape}"
                )
            param.value[...] = stored
    return model
