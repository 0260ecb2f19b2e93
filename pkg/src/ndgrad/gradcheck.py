"""Central finite-difference checks for analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from src.ndgrad.ops import Operand, value_of
from src.ndgrad.tape import Var, grad
from src.ndgrad.tensor import Tensor


@dataclass(frozen=True)
class GradCheckResult:
    """Outcome of a gradient check.

    Attributes:
        relative_errors: ``|analytic - numeric| / max(|analytic| + |numeric|, floor)``
            in the Euclidean norm, per parameter.
        tolerance: Relative error bound that was applied.
    """

    relative_errors: dict[str, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        """Whether every parameter is within tolerance."""
        return all(error < self.tolerance for error in self.relative_errors.values())

    @property
    def worst(self) -> tuple[str, float]:
        """Parameter with the largest relative error."""
        name = max(self.relative_errors, key=self.relative_errors.__getitem__)
        return name, self.relative_errors[name]


def numerical_gradient(
    fn: Callable[[Mapping[str, Operand]], Operand],
    params: Mapping[str, Tensor],
    name: str,
    h: float = 1e-5,
) -> np.ndarray:
    """Central-difference gradient of ``fn`` with respect to one parameter.

    Args:
        fn: Scalar function of the named parameters.
        params: Point of evaluation.
        name: Parameter to perturb.
        h: Step size.

    Returns:
        np.ndarray: Numerical gradient shaped like the parameter.
    """
    base = params[name].numpy()
    flat = base.reshape(-1)
    out = np.zeros_like(flat)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        upper = _evaluate(fn, params, name, base)
        flat[i] = original - h
        lower = _evaluate(fn, params, name, base)
        flat[i] = original
        out[i] = (upper - lower) / (2.0 * h)
    return out.reshape(base.shape)


def check_gradients(
    fn: Callable[[Mapping[str, Var]], Var],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    tolerance: float = 1e-4,
    floor: float = 1e-10,
    names: Optional[list[str]] = None,
) -> GradCheckResult:
    """Compare analytic and central-difference gradients.

    Args:
        fn: Scalar function built from ndgrad primitives.
        params: Point of evaluation.
        h: Finite-difference step.
        tolerance: Relative error bound.
        floor: Denominator floor for parameters with vanishing gradients.
        names: Subset of parameters to check; all by default.

    Returns:
        GradCheckResult: Relative error per checked parameter.
    """
    analytic = grad(fn, params)
    errors: dict[str, float] = {}
    for name in names or list(params):
        numeric = numerical_gradient(fn, params, name, h)
        exact = analytic[name].data
        denominator = max(np.linalg.norm(exact) + np.linalg.norm(numeric), floor)
        errors[name] = float(np.linalg.norm(exact - numeric) / denominator)
    return GradCheckResult(errors, tolerance)


def _evaluate(
    fn: Callable[[Mapping[str, Operand]], Operand],
    params: Mapping[str, Tensor],
    name: str,
    perturbed: np.ndarray,
) -> float:
    point = dict(params)
    point[name] = Tensor(perturbed)
    return float(value_of(fn(point)).reshape(-1)[0])
