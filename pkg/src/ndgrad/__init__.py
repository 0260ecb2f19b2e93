"""Minimal numeric core: tensors, differentiable primitives, reverse-mode tape."""

from src.ndgrad.gradcheck import GradCheckResult, check_gradients, numerical_gradient
from src.ndgrad.ops import (
    Operand,
    add,
    add_scalar,
    clamp_min,
    log,
    matmul,
    mean_all,
    min_reduce,
    pairwise_sq_dist,
    reciprocal,
    relu,
    scale,
    sigmoid,
    softmax_cross_entropy,
    square,
    sub,
    sum_all,
    transpose,
    value_of,
)
from src.ndgrad.tape import GradTape, Var, grad, value_and_grad
from src.ndgrad.tensor import Tensor, eye, ones, zeros

__all__ = [
    "GradCheckResult",
    "GradTape",
    "Operand",
    "Tensor",
    "Var",
    "add",
    "add_scalar",
    "check_gradients",
    "clamp_min",
    "eye",
    "grad",
    "log",
    "matmul",
    "mean_all",
    "min_reduce",
    "numerical_gradient",
    "ones",
    "pairwise_sq_dist",
    "reciprocal",
    "relu",
    "scale",
    "sigmoid",
    "softmax_cross_entropy",
    "square",
    "sub",
    "sum_all",
    "transpose",
    "value_and_grad",
    "value_of",
    "zeros",
]
