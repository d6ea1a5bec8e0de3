import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from loster.augment import AugmentConfig, augment_dataset
from loster.concrete import AssignmentMatrix, ClusterConfig, GumbelSampler
from loster.densenet import ViewModel
from loster.enums import ViewTag
from loster.errors import InvalidArgumentError, ShapeError
from loster.trainer.config import TrainConfig
from loster.trainer.loop import (
    EpochRecord,
    init_state,
    joint_train,
    pretrain_view,
)

logger = logging.getLogger(__name__)


@dataclass
class ClusteringRun:
    """
    Outcome of clustering one dataset

    Attributes:
        labels (np.ndarray): Final cluster id per series
        assignment (Optional[AssignmentMatrix]): The labels as a HARD assignment
        cluster (Optional[ClusterConfig]): Clustering layer settings of the run
        history (List[EpochRecord]): Joint-phase log
        model (ViewModel): Trained original-view model
        model_aug (ViewModel): Trained augmented-view model
        pretrain_seconds (float): Time spent pretraining both views
        joint_seconds (float): Time spent in the joint phase
    """

    labels: np.ndarray
    assignment: Optional[AssignmentMatrix] = None
    cluster: Optional[ClusterConfig] = None
    history: List[EpochRecord] = field(default_factory=list)
    model: Optional[ViewModel] = None
    model_aug: Optional[ViewModel] = None
    pretrain_seconds: float = 0.0
    joint_seconds: float = 0.0

    @property
    def epochs(self) -> int:
        return len(self.history)


def seed_streams(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators derived from one seed"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def build_views(
    input_length: int, cfg: TrainConfig, rng: np.random.Generator
) -> Tuple[ViewModel, ViewModel]:
    """Freshly initialized models for the original and augmented views"""
    net = cfg.net_config()
    return (
        ViewModel.create(input_length, net, ViewTag.ORIGINAL, rng),
        ViewModel.create(input_length, net, ViewTag.AUGMENTED, rng),
    )


def pretrain_views(
    X: np.ndarray,
    X_a: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> Tuple[ViewModel, ViewModel]:
    """Create both view models and pretrain each on its own series"""
    model, model_aug = build_views(X.shape[1], cfg, rng)
    pretrain_view(model, X, cfg, rng)
    pretrain_view(model_aug, X_a, cfg, rng)
    return model, model_aug


def cluster_series(
    X: np.ndarray,
    k: int,
    cfg: TrainConfig,
    augment_cfg: Optional[AugmentConfig] = None,
    pretrained: Optional[Tuple[ViewModel, ViewModel]] = None,
) -> ClusteringRun:
    """
    Cluster a set of equal-length series end to end

    The augmented view is drawn once up front. Both views are pretrained
    (unless pretrained models are given), their centroids seeded on the
    latent codes, and the joint phase run until the labels settle.

    Parameters:
        X (np.ndarray): Series (n, L), normalized by the caller
        k (int): Number of clusters
        cfg (TrainConfig): Training hyperparameters
        augment_cfg (Optional[AugmentConfig]): Augmentation, seeded with
            cfg.seed by default
        pretrained (Optional[Tuple[ViewModel, ViewModel]]): Models to start
            the joint phase from

    Returns:
        ClusteringRun: Labels, epoch log, models and timings

    Raises:
        InvalidArgumentError: If k is outside [1, n]
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidArgumentError("need a non-empty n x L matrix of series")
    if not 1 <= k <= X.shape[0]:
        raise InvalidArgumentError(f"k must be between 1 and n={X.shape[0]}, got {k}")
    augment_cfg = augment_cfg or AugmentConfig(seed=cfg.seed)
    init_rng, train_rng, noise_rng = seed_streams(cfg.seed, 3)

    X_a = augment_dataset(X, augment_cfg)
    started = time.perf_counter()
    if pretrained is None:
        model, model_aug = pretrain_views(X, X_a, cfg, init_rng)
    else:
        model, model_aug = pretrained
        if model.input_length != X.shape[1] or model_aug.input_length != X.shape[1]:
            raise ShapeError(
                f"pretrained models expect length {model.input_length}, "
                f"data has {X.shape[1]}"
            )
    pretrain_seconds = time.perf_counter() - started
    logger.info("pretraining took %.2fs", pretrain_seconds)

    started = time.perf_counter()
    sampler = GumbelSampler(noise_rng)
    state = init_state(model, model_aug, X, X_a, k, cfg, train_rng, sampler)
    state, labels = joint_train(state, X, X_a, cfg)
    joint_seconds = time.perf_counter() - started
    logger.info("joint phase: %d epochs in %.2fs", state.epoch, joint_seconds)
    return ClusteringRun(
        labels=labels,
        assignment=AssignmentMatrix.from_labels(labels, k),
        cluster=state.cluster,
        history=state.history,
        model=model,
        model_aug=model_aug,
        pretrain_seconds=pretrain_seconds,
        joint_seconds=joint_seconds,
    )
