from .config import AugmentConfig
from .transforms import (
    augment,
    augment_dataset,
    permute_segments,
    rotate_sign,
    time_warp,
)
