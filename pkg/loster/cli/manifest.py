import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from loster import __version__
from loster.dataio import SCHEMA_VERSION
from loster.densenet.checkpoint import FORMAT_VERSION
from loster.errors import DataFormatError

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """
    What is needed to repeat a run: command, inputs, effective settings, seed
    and the versions of the file formats written

    Attributes:
        command (str): Subcommand name
        config_file (Optional[str]): Configuration file given, if any
        settings (Dict[str, Any]): Effective TrainConfig, AugmentConfig and k values
        data_paths (List[str]): Input files
        output_dir (str): Where the run wrote its files
        seed (int): Seed of the run
        cluster (Optional[Dict[str, Any]]): Effective ClusterConfig, when k is known
        versions (Dict[str, Any]): Package and file format versions
    """

    command: str
    config_file: Optional[str]
    settings: Dict[str, Any]
    data_paths: List[str]
    output_dir: str
    seed: int
    cluster: Optional[Dict[str, Any]] = None
    versions: Dict[str, Any] = field(
        default_factory=lambda: {
            "loster": __version__,
            "results_schema": SCHEMA_VERSION,
            "checkpoint_format": FORMAT_VERSION,
        }
    )

    def write(self, directory: Union[str, Path]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / MANIFEST_NAME
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(asdict(self), handle, indent=2, sort_keys=True)
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
        try:
            return cls(**document)
        except TypeError as error:
            raise DataFormatError(f"{path}: not a run manifest ({error})")
