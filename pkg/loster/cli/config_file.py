"""
Flat key = value configuration files

Keys are the field names of TrainConfig and AugmentConfig (the augmentation
shares the training seed) plus `k`. Lines starting with `#` are comments.

    # SyntheticControl
    k = 6
    pretrain_epochs = 50
    enable_timewarp = false
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from loster.augment import AugmentConfig
from loster.errors import ConfigError
from loster.trainer import TrainConfig

TRUE_WORDS = {"1", "true", "yes", "on"}
FALSE_WORDS = {"0", "false", "no", "off"}

TRAIN_FIELDS = {f.name: f.type for f in fields(TrainConfig)}
AUGMENT_FIELDS = {f.name: f.type for f in fields(AugmentConfig) if f.name != "seed"}
KNOWN_KEYS = {**TRAIN_FIELDS, **AUGMENT_FIELDS, "k": int}


@dataclass(frozen=True)
class ResolvedConfig:
    """
    Effective settings of a run

    Attributes:
        train (TrainConfig): Training hyperparameters
        augment (AugmentConfig): Augmentation settings, seeded like train
        k (Optional[int]): Number of clusters when known
    """

    train: TrainConfig
    augment: AugmentConfig
    k: Optional[int] = None

    def for_seed(self, seed: int) -> "ResolvedConfig":
        return ResolvedConfig(
            replace(self.train, seed=seed), replace(self.augment, seed=seed), self.k
        )

    def to_dict(self) -> Dict[str, Any]:
        values = self.train.to_dict()
        values.update({name: getattr(self.augment, name) for name in AUGMENT_FIELDS})
        values["k"] = self.k
        return values


def coerce(key: str, text: str) -> Any:
    """
    Convert the text of a setting to the type of its field

    Raises:
        ConfigError: If the key is unknown or the text does not parse
    """
    if key not in KNOWN_KEYS:
        raise ConfigError(f"unknown setting {key!r}")
    target = KNOWN_KEYS[key]
    text = text.strip()
    if target is bool:
        word = text.lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
        raise ConfigError(f"{key}: expected true or false, got {text!r}")
    try:
        return target(text)
    except ValueError:
        raise ConfigError(f"{key}: expected {target.__name__}, got {text!r}")


def parse_assignment(text: str) -> Dict[str, Any]:
    """Parse a single `key=value` override"""
    key, separator, value = text.partition("=")
    if not separator:
        raise ConfigError(f"expected key=value, got {text!r}")
    key = key.strip()
    return {key: coerce(key, value)}


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a configuration file into typed values

    Raises:
        ConfigError: On malformed lines, unknown keys or bad values
        FileNotFoundError: If the file does not exist
    """
    values: Dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.update(parse_assignment(line))
            except ConfigError as error:
                raise ConfigError(f"{path}: line {number}: {error}")
    return values


def resolve_configs(values: Mapping[str, Any]) -> ResolvedConfig:
    """
    Build the configuration objects from typed values, defaults elsewhere

    Raises:
        ConfigError: If a key is unknown or a value violates an invariant
    """
    unknown = sorted(set(values) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(unknown)}")
    train = TrainConfig(**{key: values[key] for key in TRAIN_FIELDS if key in values})
    augment = AugmentConfig(
        seed=train.seed,
        **{key: values[key] for key in AUGMENT_FIELDS if key in values},
    )
    k = values.get("k")
    if k is not None and k < 1:
        raise ConfigError("k must be at least 1")
    return ResolvedConfig(train, augment, k)
