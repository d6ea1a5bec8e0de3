"""
Finite-difference verification of every training loss

The suite builds one small random instance of the two-view model, freezes
the Gumbel noise and straight-through offsets, disables dropout, and checks
the reconstruction, k-means, instance, cluster and total losses against
finite differences over all parameters of both views.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from loster.augment import AugmentConfig, augment_dataset
from loster.concrete import GumbelSampler, kmeanspp_init
from loster.densenet import ViewModel, embed
from loster.enums import Mode
from loster.numcore import GradientTape, Node, Parameter, finite_diff_check
from loster.trainer import TrainConfig, build_views, joint_losses, total_loss

logger = logging.getLogger(__name__)

THRESHOLD = 1e-4
# hidden pre-activations are pushed this far from the ReLU kink
KINK_MARGIN = 3.0

LossFn = Callable[[GradientTape], Node]

CHECKED_LOSSES = {
    "reconstruction": "rec",
    "kmeans": "kmeans",
    "instance": "instance",
    "cluster": "cluster",
    "total": None,
}


@dataclass
class GradcheckInstance:
    model: ViewModel
    model_aug: ViewModel
    X: np.ndarray
    X_a: np.ndarray
    cfg: TrainConfig
    sampler: GumbelSampler
    tau: float = 1.0

    @property
    def parameters(self) -> List[Parameter]:
        return self.model.parameters() + self.model_aug.parameters()


@dataclass
class GradcheckResult:
    name: str
    error: float
    passed: bool


def build_instance(
    n: int = 8,
    length: int = 12,
    hidden_dim: int = 6,
    k: int = 3,
    blocks: int = 2,
    seed: int = 0,
) -> GradcheckInstance:
    """
    Random two-view model with seeded centroids and a frozen sampler

    Parameters:
        n (int): Series in the batch
        length (int): Series length L
        hidden_dim (int): Latent size d
        k (int): Number of clusters
        blocks (int): Residual blocks per encoder and decoder
        seed (int): Seed of every random choice

    Returns:
        GradcheckInstance: Instance ready for loss_builders
    """
    rng = np.random.default_rng(seed)
    cfg = TrainConfig(
        n_enc=blocks,
        n_dec=blocks,
        hidden_dim=hidden_dim,
        dropout=0.0,
        tau0=1.0,
        seed=seed,
        progress=False,
    )
    X = rng.normal(size=(n, length))
    augment_cfg = AugmentConfig(
        seed=seed, n_segments=min(4, length), warp_knots=min(4, length)
    )
    X_a = augment_dataset(X, augment_cfg)
    model, model_aug = build_views(length, cfg, rng)
    for view_model, series in ((model, X), (model_aug, X_a)):
        for block in view_model.encoder + view_model.decoder:
            block.b_hidden.value += KINK_MARGIN
        view_model.set_centroids(kmeanspp_init(embed(view_model, series), k, rng))
    return GradcheckInstance(
        model, model_aug, X, X_a, cfg, GumbelSampler(rng, frozen=True), cfg.tau0
    )


def loss_builders(instance: GradcheckInstance) -> Dict[str, LossFn]:
    """One loss function per checked loss, all replaying the same noise"""

    def builder(component: Optional[str]) -> LossFn:
        def build(tape: GradientTape) -> Node:
            instance.sampler.rewind()
            components = joint_losses(
                instance.model,
                instance.model_aug,
                instance.X,
                instance.X_a,
                instance.cfg,
                instance.tau,
                instance.sampler,
                tape,
                Mode.EVAL,
            )
            if component is None:
                return total_loss(components)
            return components[component]

        return build

    return {name: builder(component) for name, component in CHECKED_LOSSES.items()}


def run_gradcheck(
    checks: Mapping[str, LossFn],
    params: Sequence[Parameter],
    threshold: float = THRESHOLD,
) -> List[GradcheckResult]:
    """Check every loss and report its max relative error"""
    results = []
    for name, loss_fn in checks.items():
        error = finite_diff_check(loss_fn, params)
        logger.debug("gradcheck %s: %.3g", name, error)
        results.append(GradcheckResult(name, error, error < threshold))
    return results


def gradcheck_command(
    n: int = 8,
    length: int = 12,
    hidden_dim: int = 6,
    k: int = 3,
    seed: int = 0,
    threshold: float = THRESHOLD,
    checks: Optional[Mapping[str, LossFn]] = None,
    params: Optional[Sequence[Parameter]] = None,
) -> int:
    """
    Run the suite and print one line per loss

    Custom checks and parameters replace the built-in instance when given.

    Returns:
        int: 0 if every loss passes, 1 otherwise
    """
    if checks is None:
        instance = build_instance(n, length, hidden_dim, k, seed=seed)
        checks = loss_builders(instance)
        params = instance.parameters
    results = run_gradcheck(checks, params or [], threshold)
    for result in results:
        status = "ok" if result.passed else "FAILED"
        print(f"{result.name:<16} {result.error:.3e}  {status}")
    failed = [result.name for result in results if not result.passed]
    if failed:
        print(f"gradient check failed for: {', '.join(failed)}")
        return 1
    return 0
