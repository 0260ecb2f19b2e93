"""Differentiable primitives.

Every primitive accepts traced values (``Var``) and plain values (``Tensor``,
arrays, floats). When at least one input is traced the application is recorded
on that input's tape and a ``Var`` comes back; otherwise the result is a plain
``Tensor``. Forward values are checked for finiteness and a ``NumericError``
names the primitive that produced a NaN or infinity.
"""

from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import log_softmax

from src.core.errors import DimensionError, InputValidationError, NumericError
from src.ndgrad.tape import Backward, GradTape, Var
from src.ndgrad.tensor import Tensor

Operand = Union[Var, Tensor, np.ndarray, float]


def value_of(x: Operand) -> np.ndarray:
    """Forward value of any operand as a float64 array."""
    if isinstance(x, Var):
        return x.value
    if isinstance(x, Tensor):
        return x.data
    return np.asarray(x, dtype=np.float64)


def _split(x: Operand) -> tuple[np.ndarray, Optional[Var]]:
    return value_of(x), x if isinstance(x, Var) else None


def _emit(
    primitive: str,
    value: np.ndarray,
    parents: Sequence[Optional[Var]],
    backward: Backward,
) -> Union[Var, Tensor]:
    if not np.all(np.isfinite(value)):
        raise NumericError(f"non-finite value produced by primitive {primitive!r}")
    tapes = {id(p.tape): p.tape for p in parents if p is not None}
    if not tapes:
        return Tensor.wrap(value)
    if len(tapes) > 1:
        raise DimensionError(f"{primitive}: inputs recorded on different tapes")
    tape: GradTape = next(iter(tapes.values()))
    return tape.record(primitive, value, parents, backward)


def _unbroadcast(adjoint: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while adjoint.ndim > len(shape):
        adjoint = adjoint.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and adjoint.shape[axis] != 1:
            adjoint = adjoint.sum(axis=axis, keepdims=True)
    return adjoint


def matmul(a: Operand, b: Operand) -> Union[Var, Tensor]:
    """Matrix product of ``r×s`` and ``s×t`` operands.

    Raises:
        DimensionError: If either operand is not 2-D or inner extents differ.
    """
    av, ap = _split(a)
    bv, bp = _split(b)
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise DimensionError(
            f"matmul: cannot multiply {list(av.shape)} by {list(bv.shape)}"
        )
    return _emit("matmul", av @ bv, (ap, bp), lambda g: (g @ bv.T, av.T @ g))


def add(a: Operand, b: Operand) -> Union[Var, Tensor]:
    """Elementwise sum; ``b`` may be a row vector broadcast over rows."""
    av, ap = _split(a)
    bv, bp = _split(b)
    try:
        out = av + bv
    except ValueError as e:
        raise DimensionError(
            f"add: cannot combine {list(av.shape)} and {list(bv.shape)}"
        ) from e
    return _emit(
        "add",
        out,
        (ap, bp),
        lambda g: (_unbroadcast(g, av.shape), _unbroadcast(g, bv.shape)),
    )


def sub(a: Operand, b: Operand) -> Union[Var, Tensor]:
    """Elementwise difference of equally shaped operands."""
    av, ap = _split(a)
    bv, bp = _split(b)
    if av.shape != bv.shape:
        raise DimensionError(f"sub: shapes {list(av.shape)} and {list(bv.shape)}")
    return _emit("sub", av - bv, (ap, bp), lambda g: (g, -g))


def scale(x: Operand, factor: float) -> Union[Var, Tensor]:
    """Multiply by a constant."""
    xv, xp = _split(x)
    return _emit("scale", xv * factor, (xp,), lambda g: (g * factor,))


def add_scalar(x: Operand, constant: float) -> Union[Var, Tensor]:
    """Add a constant."""
    xv, xp = _split(x)
    return _emit("add_scalar", xv + constant, (xp,), lambda g: (g,))


def sigmoid(x: Operand) -> Union[Var, Tensor]:
    """Logistic function, evaluated without overflow."""
    xv, xp = _split(x)
    out = np.empty_like(xv)
    positive = xv >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-xv[positive]))
    exp_x = np.exp(xv[~positive])
    out[~positive] = exp_x / (1.0 + exp_x)
    return _emit("sigmoid", out, (xp,), lambda g: (g * out * (1.0 - out),))


def relu(x: Operand) -> Union[Var, Tensor]:
    """Rectified linear unit; subgradient 0 at 0."""
    xv, xp = _split(x)
    mask = xv > 0
    return _emit("relu", np.where(mask, xv, 0.0), (xp,), lambda g: (g * mask,))


def square(x: Operand) -> Union[Var, Tensor]:
    """Elementwise square."""
    xv, xp = _split(x)
    return _emit("square", xv * xv, (xp,), lambda g: (2.0 * xv * g,))


def log(x: Operand) -> Union[Var, Tensor]:
    """Natural logarithm of strictly positive values."""
    xv, xp = _split(x)
    if np.any(xv <= 0):
        raise NumericError("non-finite value produced by primitive 'log'")
    return _emit("log", np.log(xv), (xp,), lambda g: (g / xv,))


def reciprocal(x: Operand) -> Union[Var, Tensor]:
    """Elementwise ``1 / x``."""
    xv, xp = _split(x)
    if np.any(xv == 0):
        raise NumericError("non-finite value produced by primitive 'reciprocal'")
    out = 1.0 / xv
    return _emit("reciprocal", out, (xp,), lambda g: (-g * out * out,))


def clamp_min(x: Operand, floor: float) -> Union[Var, Tensor]:
    """Elementwise ``max(x, floor)``; the adjoint passes only where ``x > floor``."""
    xv, xp = _split(x)
    passing = xv > floor
    return _emit(
        "clamp_min", np.where(passing, xv, floor), (xp,), lambda g: (g * passing,)
    )


def sum_all(x: Operand) -> Union[Var, Tensor]:
    """Sum of every element, as a scalar."""
    xv, xp = _split(x)
    return _emit(
        "sum", np.asarray(xv.sum()), (xp,), lambda g: (np.full(xv.shape, g.item()),)
    )


def mean_all(x: Operand) -> Union[Var, Tensor]:
    """Mean of every element, as a scalar."""
    xv, xp = _split(x)
    count = xv.size
    return _emit(
        "mean",
        np.asarray(xv.mean()),
        (xp,),
        lambda g: (np.full(xv.shape, g.item() / count),),
    )


def min_reduce(
    x: Operand, axis: int, exclude: Optional[np.ndarray] = None
) -> Union[Var, Tensor]:
    """Minimum of a matrix along one axis.

    The adjoint is routed to the argmin element only; ties go to the lowest
    index.

    Args:
        x: 2-D operand.
        axis: Axis to reduce.
        exclude: Boolean mask of entries that never take part in the minimum.

    Raises:
        DimensionError: If ``x`` is not 2-D or the mask does not match it.
        InputValidationError: If a reduced line is entirely excluded.
    """
    xv, xp = _split(x)
    if xv.ndim != 2:
        raise DimensionError(f"min_reduce: expected a matrix, got {list(xv.shape)}")
    candidates = xv
    if exclude is not None:
        if exclude.shape != xv.shape:
            raise DimensionError(
                f"min_reduce: mask {list(exclude.shape)} vs {list(xv.shape)}"
            )
        if np.any(exclude.all(axis=axis)):
            raise InputValidationError("min_reduce: a reduced line is fully excluded")
        candidates = np.where(exclude, np.inf, xv)
    arg = np.argmin(candidates, axis=axis)
    value = np.take_along_axis(xv, np.expand_dims(arg, axis), axis=axis).squeeze(axis)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        adjoint = np.zeros_like(xv)
        np.put_along_axis(
            adjoint, np.expand_dims(arg, axis), np.expand_dims(g, axis), axis
        )
        return (adjoint,)

    return _emit("min_reduce", value, (xp,), backward)


def pairwise_sq_dist(a: Operand, b: Operand) -> Union[Var, Tensor]:
    """Squared Euclidean distances between the rows of two matrices.

    ``out[i][j] = sum_k (a[i][k] - b[j][k])**2``; computed from explicit
    differences, so ``pairwise_sq_dist(a, a)`` has an exactly zero diagonal.

    Raises:
        DimensionError: If the feature dimensions differ.
    """
    av, ap = _split(a)
    bv, bp = _split(b)
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[1]:
        raise DimensionError(
            f"pairwise_sq_dist: feature dimension of {list(av.shape)} "
            f"and {list(bv.shape)} differ"
        )
    diff = av[:, None, :] - bv[None, :, :]
    out = np.einsum("ijk,ijk->ij", diff, diff)

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        weighted = 2.0 * g[:, :, None] * diff
        return weighted.sum(axis=1), -weighted.sum(axis=0)

    return _emit("pairwise_sq_dist", out, (ap, bp), backward)


def softmax_cross_entropy(logits: Operand, labels: ArrayLike) -> Union[Var, Tensor]:
    """Mean negative log-likelihood of integer labels under softmax(logits).

    Args:
        logits: ``n×K`` operand.
        labels: ``n`` class indices in ``[0, K)``.

    Raises:
        DimensionError: If shapes disagree.
        InputValidationError: If a label is out of range.
    """
    zv, zp = _split(logits)
    index = np.asarray(labels)
    if zv.ndim != 2 or index.shape != (zv.shape[0],):
        raise DimensionError(
            f"softmax_cross_entropy: logits {list(zv.shape)} "
            f"vs labels {list(index.shape)}"
        )
    if not np.issubdtype(index.dtype, np.integer):
        raise InputValidationError("softmax_cross_entropy: labels must be integers")
    n, k = zv.shape
    if np.any(index < 0) or np.any(index >= k):
        raise InputValidationError(
            f"softmax_cross_entropy: labels must lie in [0, {k})"
        )
    log_probs = log_softmax(zv, axis=1)
    rows = np.arange(n)
    value = np.asarray(-log_probs[rows, index].mean())

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        adjoint = np.exp(log_probs)
        adjoint[rows, index] -= 1.0
        return (adjoint * (g.item() / n),)

    return _emit("softmax_cross_entropy", value, (zp,), backward)


def transpose(x: Operand) -> Union[Var, Tensor]:
    """Matrix transpose."""
    xv, xp = _split(x)
    return _emit("transpose", xv.T.copy(), (xp,), lambda g: (g.T,))
