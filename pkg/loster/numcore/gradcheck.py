"""
Central finite-difference verification of taped gradients
"""

from typing import Callable, Sequence

import numpy as np

from loster.errors import EvaluationError, InvalidArgumentError, NonFiniteError
from loster.numcore.tape import GradientTape, Node, Parameter

LossFn = Callable[[GradientTape], Node]

RELATIVE_FLOOR = 1e-8

STENCIL_OFFSETS = (-2.0, -1.0, 1.0, 2.0)


def _evaluate(loss_fn: LossFn) -> float:
    try:
        value = loss_fn(GradientTape()).item()
    except NonFiniteError as error:
        raise EvaluationError(f"loss is not finite at a perturbed point: {error}")
    if not np.isfinite(value):
        raise EvaluationError("loss is not finite at a perturbed point")
    return value


def finite_diff_check(
    loss_fn: LossFn, params: Sequence[Parameter], step: float = 1e-4
) -> float:
    """
    Compare analytical gradients with central finite differences

    The numerical derivative uses the fourth-order central stencil
    (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h, which keeps truncation error
    negligible at a step large enough for round-off to stay small.

    `loss_fn` must build the loss on the tape it is given, watching every
    parameter it uses; it is called once for the analytical pass and four
    times per parameter coordinate. Parameter values are restored afterwards.

    Parameters:
        loss_fn (LossFn): Builds a scalar loss on a fresh tape
        params (Sequence[Parameter]): Parameters to perturb
        step (float): Perturbation size, must be positive

    Returns:
        float: Max over coordinates of |analytic - numeric| divided by
            max(|analytic|, |numeric|, 1e-8); 0.0 when there are no coordinates

    Raises:
        InvalidArgumentError: If step is not positive
        EvaluationError: If the loss is not finite at a perturbed point
    """
    if step <= 0:
        raise InvalidArgumentError(
            f"finite-difference step must be positive, got {step}"
        )
    params = list(params)
    if not any(param.size for param in params):
        return 0.0

    for param in params:
        param.zero_grad()
    tape = GradientTape()
    tape.backward(loss_fn(tape))
    analytic = {param.name: param.grad.copy() for param in params}

    worst = 0.0
    for param in params:
        expected = analytic[param.name].reshape(-1)
        for i in range(param.size):
            original = param.value.flat[i]
            values = []
            try:
                for offset in STENCIL_OFFSETS:
                    param.value.flat[i] = original + offset * step
                    values.append(_evaluate(loss_fn))
            finally:
                param.value.flat[i] = original

            lower2, lower1, upper1, upper2 = values
            # a loss that ignores the coordinate gives exactly 0
            numeric = (8.0 * (upper1 - lower1) - (upper2 - lower2)) / (12.0 * step)
            gap = abs(expected[i] - numeric)
            worst = max(
                worst, gap / max(abs(expected[i]), abs(numeric), RELATIVE_FLOOR)
            )
    return worst
