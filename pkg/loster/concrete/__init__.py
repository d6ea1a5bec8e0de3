from .config import ClusterConfig
from .assignment import (
    AssignmentMatrix,
    GumbelSampler,
    assignment_probs,
    check_row_stochastic,
    gumbel_softmax_sample,
    nearest_centroid,
    sample_gumbel,
    straight_through,
)
from .kmeans import (
    kmeans_loss,
    kmeanspp_init,
    lloyd_objective,
    lloyd_refine,
    two_view_kmeans_loss,
)
