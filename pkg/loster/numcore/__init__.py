from .tape import GradientTape, Node, Parameter, backward
from .ops import (
    add,
    sub,
    mul,
    scale,
    neg,
    matmul,
    transpose,
    linear_forward,
    relu,
    exp,
    log,
    xlogx,
    square,
    sum,
    mean,
    sum_squares,
    softmax,
    l2_normalize,
    sq_distances,
    layer_norm,
    dropout,
    straight_through,
    one_hot_rows,
)
from .gradcheck import finite_diff_check
