from .config import TrainConfig
from .schedules import anneal_tau, lr_at
from .optimizers import SGD, Adam, Optimizer
from .loop import (
    LOSS_COMPONENTS,
    EpochRecord,
    TrainState,
    batches,
    final_assignment,
    init_state,
    joint_epoch,
    joint_losses,
    joint_train,
    pretrain_view,
    smooth_columns,
    total_loss,
)
from .pipeline import (
    ClusteringRun,
    build_views,
    cluster_series,
    pretrain_views,
    seed_streams,
)
