"""
Residual block with one hidden layer and a fully linear skip connection

    h  = ReLU(Linear(x))
    h' = Dropout(Linear(h)) + Linear(x)
    o  = LayerNorm(h')          (when the block carries layer-norm parameters)
"""

from typing import Dict, List, Optional, Union

import numpy as np

from loster.enums import Mode
from loster.errors import ShapeError
from loster.numcore import GradientTape, Node, Parameter
from loster.numcore import ops


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class ResidualBlockParams:
    """
    Parameters of one residual block

    Attributes:
        w_hidden, b_hidden (Parameter): in -> hidden map
        w_out, b_out (Parameter): hidden -> out map
        w_skip, b_skip (Parameter): in -> out skip map
        gamma, beta (Optional[Parameter]): Layer-norm scale and shift, None
            when the block does not normalize
    """

    def __init__(
        self,
        w_hidden: Parameter,
        b_hidden: Parameter,
        w_out: Parameter,
        b_out: Parameter,
        w_skip: Parameter,
        b_skip: Parameter,
        gamma: Optional[Parameter] = None,
        beta: Optional[Parameter] = None,
    ) -> None:
        in_dim, hidden_dim = w_hidden.shape
        out_dim = w_out.shape[1]
        if (
            b_hidden.shape != (hidden_dim,)
            or w_out.shape[0] != hidden_dim
            or b_out.shape != (out_dim,)
            or w_skip.shape != (in_dim, out_dim)
            or b_skip.shape != (out_dim,)
        ):
            raise ShapeError("residual block maps have inconsistent dimensions")
        if (gamma is None) != (beta is None):
            raise ShapeError("layer norm needs both gamma and beta")
        if gamma is not None and (
            gamma.shape != (out_dim,) or beta.shape != (out_dim,)
        ):
            raise ShapeError("layer-norm parameters do not match the output size")
        self.w_hidden = w_hidden
        self.b_hidden = b_hidden
        self.w_out = w_out
        self.b_out = b_out
        self.w_skip = w_skip
        self.b_skip = b_skip
        self.gamma = gamma
        self.beta = beta

    @classmethod
    def create(
        cls,
        prefix: str,
        in_dim: int,
        hidden_dim: int,
        out_dim: int,
        layer_norm: bool,
        rng: np.random.Generator,
    ) -> "ResidualBlockParams":
        """
        Initialize a block uniformly in +-1/sqrt(fan_in)

        Parameters:
            prefix (str): Name prefix for the block's parameters
            in_dim (int): Input size
            hidden_dim (int): Hidden layer width
            out_dim (int): Output size
            layer_norm (bool): Whether the block normalizes its output
            rng (np.random.Generator): Initialization stream

        Returns:
            ResidualBlockParams: Fresh block
        """
        gamma = beta = None
        if layer_norm:
            gamma = Parameter(f"{prefix}.gamma", np.ones(out_dim))
            beta = Parameter(f"{prefix}.beta", np.zeros(out_dim))
        return cls(
            Parameter(
                f"{prefix}.w_hidden", _uniform(rng, in_dim, (in_dim, hidden_dim))
            ),
            Parameter(f"{prefix}.b_hidden", _uniform(rng, in_dim, hidden_dim)),
            Parameter(
                f"{prefix}.w_out", _uniform(rng, hidden_dim, (hidden_dim, out_dim))
            ),
            Parameter(f"{prefix}.b_out", _uniform(rng, hidden_dim, out_dim)),
            Parameter(f"{prefix}.w_skip", _uniform(rng, in_dim, (in_dim, out_dim))),
            Parameter(f"{prefix}.b_skip", _uniform(rng, in_dim, out_dim)),
            gamma,
            beta,
        )

    @property
    def in_dim(self) -> int:
        return self.w_hidden.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w_out.shape[1]

    @property
    def has_layer_norm(self) -> bool:
        return self.gamma is not None

    def parameters(self) -> List[Parameter]:
        params = [
            self.w_hidden,
            self.b_hidden,
            self.w_out,
            self.b_out,
            self.w_skip,
            self.b_skip,
        ]
        if self.gamma is not None:
            params += [self.gamma, self.beta]
        return params

    def state(self) -> Dict[str, np.ndarray]:
        return {param.name: param.value for param in self.parameters()}


def residual_block_forward(
    x: Union[Node, np.ndarray],
    params: ResidualBlockParams,
    tape: GradientTape,
    dropout: float = 0.0,
    mode: Mode = Mode.EVAL,
    rng: Optional[np.random.Generator] = None,
) -> Node:
    """
    Apply one residual block to a batch of rows

    Parameters:
        x (Union[Node, np.ndarray]): Input (n, in) or (in,)
        params (ResidualBlockParams): Block parameters
        tape (GradientTape): Tape to record on
        dropout (float): Dropout probability on the hidden branch
        mode (Mode): TRAIN enables dropout
        rng (Optional[np.random.Generator]): Dropout mask stream

    Returns:
        Node: Output (n, out) or (out,)

    Raises:
        ShapeError: If the input width does not match the block
    """
    if not isinstance(x, Node):
        x = tape.constant(x)
    if x.shape[-1] != params.in_dim:
        raise ShapeError(
            f"block expects input width {params.in_dim}, got {x.shape[-1]}"
        )
    hidden = ops.relu(
        ops.linear_forward(x, tape.watch(params.w_hidden), tape.watch(params.b_hidden))
    )
    branch = ops.linear_forward(
        hidden, tape.watch(params.w_out), tape.watch(params.b_out)
    )
    branch = ops.dropout(branch, dropout, mode is Mode.TRAIN, rng)
    skip = ops.linear_forward(x, tape.watch(params.w_skip), tape.watch(params.b_skip))
    output = branch + skip
    if params.has_layer_norm:
        output = ops.layer_norm(
            output, tape.watch(params.gamma), tape.watch(params.beta)
        )
    return output
