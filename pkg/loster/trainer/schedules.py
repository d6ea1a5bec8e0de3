"""Per-epoch temperature and learning-rate schedules of the joint phase"""

from loster.errors import InvalidArgumentError
from loster.trainer.config import TrainConfig


def _check_epoch(epoch: int) -> None:
    if epoch < 0:
        raise InvalidArgumentError(f"epoch must be non-negative, got {epoch}")


def anneal_tau(
    epoch: int, tau0: float = 10.0, beta: float = 0.65, tau_floor: float = 0.01
) -> float:
    """
    Gumbel-softmax temperature of an epoch: max(tau0 * beta**epoch, tau_floor)
    """
    _check_epoch(epoch)
    return max(tau0 * beta**epoch, tau_floor)


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """
    Joint-phase learning rate: joint_lr * lr_decay**(epoch // lr_decay_every)
    """
    _check_epoch(epoch)
    return cfg.joint_lr * cfg.lr_decay ** (epoch // cfg.lr_decay_every)
