"""
Training procedure

Each view's autoencoder is pretrained on its reconstruction loss, the
centroids of each view are seeded with k-means++ on the latent codes, and
then both views are optimized jointly on

    L = L_rec + L_kmeans + L_instance + L_cluster

with one SGD step per batch on the networks and centroids of both views.
Training stops once fewer than stop_fraction of the series change cluster
between consecutive epochs.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from loster.concrete import (
    ClusterConfig,
    GumbelSampler,
    assignment_probs,
    kmeanspp_init,
    nearest_centroid,
    two_view_kmeans_loss,
)
from loster.concrete.assignment import PROBABILITY_FLOOR
from loster.contrastive import cluster_loss, instance_loss
from loster.densenet import (
    ViewModel,
    decode,
    embed,
    encode,
    joint_reconstruction_loss,
    reconstruction_loss,
)
from loster.enums import Mode
from loster.errors import (
    InvalidArgumentError,
    NonFiniteError,
    ShapeError,
    TrainingError,
)
from loster.numcore import GradientTape, Node
from loster.numcore import ops
from loster.trainer.config import TrainConfig
from loster.trainer.optimizers import SGD, Adam
from loster.trainer.schedules import anneal_tau, lr_at

logger = logging.getLogger(__name__)

LOSS_COMPONENTS = ("rec", "kmeans", "instance", "cluster")


@dataclass
class EpochRecord:
    """One row of the training log"""

    epoch: int
    tau: float
    lr: float
    loss_rec: float
    loss_kmeans: float
    loss_instance: float
    loss_cluster: float
    loss_total: float
    changed_fraction: float
    seconds: float


@dataclass
class TrainState:
    """
    Mutable state of the joint phase

    Attributes:
        model (ViewModel): Original-view network and centroids
        model_aug (ViewModel): Augmented-view network and centroids
        optimizer (SGD): Optimizer over the parameters of both views
        sampler (GumbelSampler): Gumbel noise source
        rng (np.random.Generator): Shuffling and dropout stream
        labels (np.ndarray): Full-dataset hard labels after the last epoch
        cluster (ClusterConfig): k, sigma and the temperature schedule
        epoch (int): Joint epochs completed
        tau (float): Temperature of the last completed epoch
        history (List[EpochRecord]): Log of the completed epochs
    """

    model: ViewModel
    model_aug: ViewModel
    optimizer: SGD
    sampler: GumbelSampler
    rng: np.random.Generator
    labels: np.ndarray
    cluster: ClusterConfig
    epoch: int = 0
    tau: float = 10.0
    history: List[EpochRecord] = field(default_factory=list)


def batches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Shuffled index batches covering 0..n-1, the last one possibly short"""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _check_data(data: np.ndarray, model: ViewModel) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise InvalidArgumentError("training data must be a non-empty n x L matrix")
    if data.shape[1] != model.input_length:
        raise ShapeError(
            f"model expects series of length {model.input_length}, got {data.shape[1]}"
        )
    return data


def pretrain_view(
    model: ViewModel,
    data: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
    history: Optional[List[float]] = None,
) -> ViewModel:
    """
    Fit one view's autoencoder to its reconstruction loss with Adam

    Parameters:
        model (ViewModel): Model to train in place
        data (np.ndarray): Series of this view (n, L)
        cfg (TrainConfig): Epochs, learning rate, batch size, Adam settings
        rng (np.random.Generator): Shuffling and dropout stream
        history (Optional[List[float]]): Receives the mean loss of every epoch

    Returns:
        ViewModel: The same model, trained

    Raises:
        TrainingError: If a loss becomes non-finite
    """
    data = _check_data(data, model)
    optimizer = Adam(
        model.network_parameters(), cfg.pretrain_lr, cfg.adam_betas, cfg.adam_eps
    )
    epochs = tqdm(
        range(cfg.pretrain_epochs),
        desc=f"pretrain {model.view.value}",
        disable=not cfg.progress,
        leave=False,
    )
    for epoch in epochs:
        total = 0.0
        for batch_index, rows in enumerate(batches(len(data), cfg.batch_size, rng)):
            x = data[rows]
            tape = GradientTape()
            try:
                z = encode(x, model, Mode.TRAIN, tape, rng)
                x_hat = decode(z, model, Mode.TRAIN, tape, rng)
                loss = reconstruction_loss(x, x_hat)
            except NonFiniteError as error:
                raise TrainingError(str(error), epoch, batch_index) from error
            tape.backward(loss)
            optimizer.step()
            total += loss.item() * len(rows)
        mean_loss = total / len(data)
        if history is not None:
            history.append(mean_loss)
        logger.debug(
            "pretrain %s epoch %d: reconstruction %.6g",
            model.view.value,
            epoch,
            mean_loss,
        )
    return model


def final_assignment(model: ViewModel, X: np.ndarray, sigma: float) -> np.ndarray:
    """
    Hard label of every series: argmax of the RBF cluster probabilities of
    the original view, ties to the lowest index

    The probabilities are monotone in -||z - mu||^2, so the label is the
    nearest centroid.

    Parameters:
        model (ViewModel): Trained model with centroids
        X (np.ndarray): Series (n, L)
        sigma (float): RBF bandwidth

    Returns:
        np.ndarray: Labels in 0..k-1
    """
    if model.centroids is None:
        raise InvalidArgumentError("model has no centroids")
    if sigma <= 0:
        raise InvalidArgumentError("sigma must be positive")
    return nearest_centroid(embed(model, X), model.centroids.value)


def init_state(
    model: ViewModel,
    model_aug: ViewModel,
    X: np.ndarray,
    X_a: np.ndarray,
    k: int,
    cfg: TrainConfig,
    rng: np.random.Generator,
    sampler: Optional[GumbelSampler] = None,
) -> TrainState:
    """
    Seed the centroids of both views with k-means++ and Lloyd refinement on
    their latent codes, and set up the joint optimizer

    Raises:
        InvalidArgumentError: If k is outside [1, n]
    """
    X = _check_data(X, model)
    X_a = _check_data(X_a, model_aug)
    if len(X) != len(X_a):
        raise ShapeError("both views need the same number of series")
    if not 1 <= k <= len(X):
        raise InvalidArgumentError(f"k must be between 1 and n={len(X)}, got {k}")
    for view_model, series in ((model, X), (model_aug, X_a)):
        view_model.set_centroids(
            kmeanspp_init(embed(view_model, series), k, rng, cfg.lloyd_iterations)
        )
    optimizer = SGD(
        model.parameters() + model_aug.parameters(), cfg.joint_lr, cfg.momentum
    )
    cluster = cfg.cluster_config(k)
    return TrainState(
        model=model,
        model_aug=model_aug,
        optimizer=optimizer,
        sampler=sampler or GumbelSampler(rng),
        rng=rng,
        labels=final_assignment(model, X, cluster.sigma),
        cluster=cluster,
        tau=cluster.tau,
    )


def smooth_columns(q: Node) -> Node:
    """
    Mix a tiny uniform mass into every assignment row

    Rows keep summing to 1 and no cluster column of a batch has zero norm,
    which a low temperature would otherwise produce for unoccupied clusters.
    """
    k = q.shape[-1]
    return ops.scale(q, 1.0 / (1.0 + k * PROBABILITY_FLOOR)) + PROBABILITY_FLOOR / (
        1.0 + k * PROBABILITY_FLOOR
    )


def joint_losses(
    model: ViewModel,
    model_aug: ViewModel,
    x: np.ndarray,
    x_aug: np.ndarray,
    cfg: TrainConfig,
    tau: float,
    sampler: GumbelSampler,
    tape: GradientTape,
    mode: Mode = Mode.TRAIN,
    rng: Optional[np.random.Generator] = None,
    components: Optional[Dict[str, Node]] = None,
    cluster: Optional[ClusterConfig] = None,
) -> Dict[str, Node]:
    """
    The four loss components on one batch of both views

    Parameters:
        model (ViewModel): Original view with centroids
        model_aug (ViewModel): Augmented view with centroids
        x (np.ndarray): Original batch (m, L)
        x_aug (np.ndarray): Augmented batch (m, L)
        cfg (TrainConfig): Contrastive temperatures
        tau (float): Gumbel-softmax temperature
        sampler (GumbelSampler): Noise source
        tape (GradientTape): Tape to record on
        mode (Mode): TRAIN enables dropout
        rng (Optional[np.random.Generator]): Dropout stream
        components (Optional[Dict[str, Node]]): Filled as the components are
            computed, so a caller still sees them if a later one fails
        cluster (Optional[ClusterConfig]): Source of sigma, derived from cfg
            and the centroid count when not given

    Returns:
        Dict[str, Node]: Scalar nodes keyed rec, kmeans, instance, cluster
    """
    components = {} if components is None else components
    if cluster is None:
        cluster = cfg.cluster_config(model.centroids.shape[0])
    z = encode(x, model, mode, tape, rng)
    z_aug = encode(x_aug, model_aug, mode, tape, rng)
    x_hat = decode(z, model, mode, tape, rng)
    x_aug_hat = decode(z_aug, model_aug, mode, tape, rng)
    components["rec"] = joint_reconstruction_loss(x, x_hat, x_aug, x_aug_hat)

    centroids = tape.watch(model.centroids)
    centroids_aug = tape.watch(model_aug.centroids)
    q, q_hard = sampler.sample(assignment_probs(z, centroids, cluster.sigma), tau)
    q_aug, q_aug_hard = sampler.sample(
        assignment_probs(z_aug, centroids_aug, cluster.sigma), tau
    )
    components["kmeans"] = two_view_kmeans_loss(
        z, q_hard, centroids, z_aug, q_aug_hard, centroids_aug
    )
    components["instance"] = instance_loss(z, z_aug, cfg.tau_i, cfg.exclude_self)
    components["cluster"] = cluster_loss(
        smooth_columns(q), smooth_columns(q_aug), cfg.tau_c, cfg.exclude_self
    )
    return components


def total_loss(components: Dict[str, Node]) -> Node:
    """Unweighted sum of the loss components"""
    total = components[LOSS_COMPONENTS[0]]
    for name in LOSS_COMPONENTS[1:]:
        total = total + components[name]
    return total


def joint_epoch(
    state: TrainState, X: np.ndarray, X_a: np.ndarray, cfg: TrainConfig
) -> EpochRecord:
    """
    One pass over the data with fixed tau and learning rate, followed by a
    full-dataset relabeling

    Raises:
        TrainingError: If a loss component becomes non-finite
    """
    started = time.perf_counter()
    epoch = state.epoch
    cluster = state.cluster
    tau = anneal_tau(epoch, cluster.tau, cfg.beta, cluster.tau_floor)
    lr = lr_at(epoch, cfg)
    sums = dict.fromkeys(LOSS_COMPONENTS + ("total",), 0.0)
    for batch_index, rows in enumerate(batches(len(X), cfg.batch_size, state.rng)):
        tape = GradientTape()
        components: Dict[str, Node] = {}
        try:
            joint_losses(
                state.model,
                state.model_aug,
                X[rows],
                X_a[rows],
                cfg,
                tau,
                state.sampler,
                tape,
                Mode.TRAIN,
                state.rng,
                components,
                cluster,
            )
            loss = total_loss(components)
        except NonFiniteError as error:
            values = {name: node.item() for name, node in components.items()}
            raise TrainingError(str(error), epoch, batch_index, values) from error
        tape.backward(loss)
        state.optimizer.step(lr)
        for name, node in components.items():
            sums[name] += node.item() * len(rows)
        sums["total"] += loss.item() * len(rows)

    labels = final_assignment(state.model, X, cluster.sigma)
    changed = float(np.mean(labels != state.labels))
    state.labels = labels
    state.epoch += 1
    state.tau = tau
    n = len(X)
    record = EpochRecord(
        epoch=epoch,
        tau=tau,
        lr=lr,
        loss_rec=sums["rec"] / n,
        loss_kmeans=sums["kmeans"] / n,
        loss_instance=sums["instance"] / n,
        loss_cluster=sums["cluster"] / n,
        loss_total=sums["total"] / n,
        changed_fraction=changed,
        seconds=time.perf_counter() - started,
    )
    state.history.append(record)
    return record


def joint_train(
    state: TrainState, data: np.ndarray, data_a: np.ndarray, cfg: TrainConfig
) -> Tuple[TrainState, np.ndarray]:
    """
    Run joint epochs until the labels settle or max_epochs is reached

    Parameters:
        state (TrainState): State from init_state
        data (np.ndarray): Original view (n, L)
        data_a (np.ndarray): Augmented view (n, L)
        cfg (TrainConfig): Schedules and stopping rule

    Returns:
        Tuple[TrainState, np.ndarray]: Final state and hard labels
    """
    data = _check_data(data, state.model)
    data_a = _check_data(data_a, state.model_aug)
    progress = tqdm(
        total=cfg.max_epochs,
        initial=state.epoch,
        desc="joint",
        disable=not cfg.progress,
    )
    with progress:
        while state.epoch < cfg.max_epochs:
            record = joint_epoch(state, data, data_a, cfg)
            progress.update(1)
            logger.info(
                "epoch %d tau=%.4g lr=%.3g rec=%.5g kmeans=%.5g instance=%.5g "
                "cluster=%.5g total=%.5g changed=%.4f (%.2fs)",
                record.epoch,
                record.tau,
                record.lr,
                record.loss_rec,
                record.loss_kmeans,
                record.loss_instance,
                record.loss_cluster,
                record.loss_total,
                record.changed_fraction,
                record.seconds,
            )
            if record.changed_fraction < cfg.stop_fraction:
                logger.info("assignments settled after epoch %d", record.epoch)
                break
    return state, state.labels
