"""
First-order optimizers acting in place on Parameter values

Both read the gradients left in Parameter.grad by the last backward pass.
"""

from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from loster.errors import InvalidArgumentError
from loster.numcore import Parameter


class Optimizer:
    """
    Common bookkeeping: the parameter list and the base learning rate

    Attributes:
        params (List[Parameter]): Parameters updated by step()
        lr (float): Learning rate used when step() gets none
    """

    def __init__(self, params: Iterable[Parameter], lr: float) -> None:
        if lr <= 0:
            raise InvalidArgumentError("learning rate must be positive")
        self.params = list(params)
        names = [param.name for param in self.params]
        if len(set(names)) != len(names):
            raise InvalidArgumentError("optimizer parameters must have unique names")
        self.lr = lr

    def zero_grad(self) -> None:
        for param in self.params:
            param.zero_grad()

    def step(self, lr: Optional[float] = None) -> None:
        raise NotImplementedError


class SGD(Optimizer):
    """
    Stochastic gradient descent with optional heavy-ball momentum

    With momentum 0 every step is exactly value -= lr * grad.
    """

    def __init__(
        self, params: Iterable[Parameter], lr: float, momentum: float = 0.0
    ) -> None:
        super().__init__(params, lr)
        if not 0.0 <= momentum < 1.0:
            raise InvalidArgumentError("momentum must be in [0, 1)")
        self.momentum = momentum
        self.velocity: Dict[str, np.ndarray] = {}

    def step(self, lr: Optional[float] = None) -> None:
        lr = self.lr if lr is None else lr
        for param in self.params:
            update = param.grad
            if self.momentum:
                velocity = self.velocity.get(param.name)
                if velocity is not None:
                    update = self.momentum * velocity + update
                self.velocity[param.name] = update
            param.value -= lr * update


class Adam(Optimizer):
    """
    Adam with bias-corrected moment estimates

    Attributes:
        betas (Tuple[float, float]): Decay rates of the first and second moments
        eps (float): Denominator guard
        t (int): Steps taken
    """

    def __init__(
        self,
        params: Iterable[Parameter],
        lr: float = 1e-3,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ) -> None:
        super().__init__(params, lr)
        self.betas = betas
        self.eps = eps
        self.t = 0
        self.first: Dict[str, np.ndarray] = {
            param.name: np.zeros_like(param.value) for param in self.params
        }
        self.second: Dict[str, np.ndarray] = {
            param.name: np.zeros_like(param.value) for param in self.params
        }

    def step(self, lr: Optional[float] = None) -> None:
        lr = self.lr if lr is None else lr
        beta1, beta2 = self.betas
        self.t += 1
        for param in self.params:
            m = self.first[param.name]
            v = self.second[param.name]
            m *= beta1
            m += (1.0 - beta1) * param.grad
            v *= beta2
            v += (1.0 - beta2) * param.grad * param.grad
            m_hat = m / (1.0 - beta1**self.t)
            v_hat = v / (1.0 - beta2**self.t)
            param.value -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
