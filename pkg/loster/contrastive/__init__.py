from .config import ContrastiveConfig
from .losses import cluster_entropy, cluster_loss, instance_loss, l2_normalize
