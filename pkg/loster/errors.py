"""
Exception hierarchy shared by every loster subpackage.

Argument problems subclass ValueError so callers that only know the
standard library can still catch them.
"""

from typing import Dict, Optional


class LosterError(Exception):
    """Base class for all loster errors"""


class ShapeError(LosterError, ValueError):
    """Operand shapes do not agree"""


class InvalidArgumentError(LosterError, ValueError):
    """An argument is outside its documented range"""


class ConfigError(LosterError, ValueError):
    """A configuration value violates its invariant"""


class NormalizationError(LosterError, ValueError):
    """L2 normalization of a zero-norm vector was requested"""


class TapeUsageError(LosterError):
    """The gradient tape was used incorrectly"""


class NonFiniteError(LosterError, ArithmeticError):
    """A primitive produced NaN or Inf"""


class EvaluationError(LosterError, ArithmeticError):
    """A loss evaluated at a perturbed point was not finite"""


class DataFormatError(LosterError, ValueError):
    """
    Input file could not be parsed

    Attributes:
        line (Optional[int]): 1-based line number of the offending row
    """

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TrainingError(LosterError, RuntimeError):
    """
    Training aborted because a loss became non-finite

    Attributes:
        epoch (int): Epoch in which the failure happened
        batch (int): Batch index inside the epoch
        components (Dict[str, float]): Loss components evaluated so far
    """

    def __init__(
        self,
        message: str,
        epoch: int,
        batch: int,
        components: Optional[Dict[str, float]] = None,
    ) -> None:
        self.epoch = epoch
        self.batch = batch
        self.components = dict(components or {})
        details = ", ".join(f"{k}={v:.6g}" for k, v in self.components.items())
        text = f"{message} (epoch {epoch}, batch {batch})"
        if details:
            text += f": {details}"
        super().__init__(text)
