from enum import Enum


class Mode(Enum):
    """
    Forward-pass mode of a network

    Attributes:
        TRAIN: Dropout active
        EVAL: Dropout is the identity
    """

    TRAIN = "train"
    EVAL = "eval"


class ViewTag(Enum):
    """
    Which of the two parallel pipelines a model belongs to

    Attributes:
        ORIGINAL: The view fed with the input series
        AUGMENTED: The view fed with the precomputed augmented series
    """

    ORIGINAL = "original"
    AUGMENTED = "augmented"


class AssignmentKind(Enum):
    """
    Kind of a cluster assignment matrix

    Attributes:
        SOFT: Row-stochastic relaxation
        HARD: One-hot rows
    """

    SOFT = "soft"
    HARD = "hard"
