from .config import NetConfig
from .blocks import ResidualBlockParams, residual_block_forward
from .model import ViewModel, encode, decode, embed
from .losses import reconstruction_loss, joint_reconstruction_loss
from .checkpoint import save_checkpoint, load_checkpoint
