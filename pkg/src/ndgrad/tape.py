"""Reverse-mode gradient tape.

A forward evaluation records every primitive into a ``GradTape``; replaying the
recorded adjoints in reverse order yields the gradient of a scalar output with
respect to every watched parameter. The reduction order is the reverse record
order, so gradients are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, TypeVar

import numpy as np

from src.core.errors import DimensionError, NumericError
from src.ndgrad.tensor import Tensor

Backward = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]
Aux = TypeVar("Aux")


@dataclass(frozen=True, slots=True, eq=False)
class Var:
    """A value produced on a tape.

    Attributes:
        tape: Tape the value was recorded on.
        index: Slot of the value on the tape.
        value: Forward value.
    """

    tape: GradTape
    index: int
    value: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        """Extents of the forward value."""
        return tuple(self.value.shape)


@dataclass(frozen=True, slots=True)
class _Record:
    primitive: str
    output: int
    inputs: tuple[Optional[int], ...]
    backward: Backward


@dataclass
class GradTape:
    """Ordered record of primitives for one forward/backward pass.

    A tape is confined to one thread.
    """

    _records: list[_Record] = field(default_factory=list)
    _values: list[np.ndarray] = field(default_factory=list)
    _params: dict[str, int] = field(default_factory=dict)

    def watch(self, name: str, tensor: Tensor) -> Var:
        """Register a parameter and return its traced value."""
        if name in self._params:
            raise DimensionError(f"parameter {name!r} watched twice")
        var = self._push(tensor.data)
        self._params[name] = var.index
        return var

    def record(
        self,
        primitive: str,
        value: np.ndarray,
        parents: Sequence[Optional[Var]],
        backward: Backward,
    ) -> Var:
        """Append a primitive application and return its output."""
        output = self._push(value)
        inputs = tuple(p.index if p is not None else None for p in parents)
        self._records.append(_Record(primitive, output.index, inputs, backward))
        return output

    def gradient(self, output: Var) -> dict[str, np.ndarray]:
        """Replay adjoints from a scalar output.

        Args:
            output: Scalar value recorded on this tape.

        Returns:
            dict[str, np.ndarray]: Gradient per watched parameter; exact zeros
                for parameters the output does not depend on.

        Raises:
            DimensionError: If the output is not a scalar or lives elsewhere.
            NumericError: If an adjoint becomes non-finite.
        """
        if output.tape is not self:
            raise DimensionError("output was recorded on a different tape")
        if output.value.size != 1:
            raise DimensionError(
                f"gradient needs a scalar output, got shape {list(output.shape)}"
            )
        adjoints: list[Optional[np.ndarray]] = [None] * len(self._values)
        adjoints[output.index] = np.ones_like(output.value)
        for record in reversed(self._records):
            upstream = adjoints[record.output]
            if upstream is None:
                continue
            for slot, contribution in zip(
                record.inputs, record.backward(upstream), strict=True
            ):
                if slot is None or contribution is None:
                    continue
                if not np.all(np.isfinite(contribution)):
                    raise NumericError(
                        f"non-finite adjoint in primitive {record.primitive!r}"
                    )
                current = adjoints[slot]
                adjoints[slot] = (
                    contribution.copy() if current is None else current + contribution
                )
        return {
            name: (
                adjoints[slot]
                if adjoints[slot] is not None
                else np.zeros_like(self._values[slot])
            )
            for name, slot in self._params.items()
        }

    def _push(self, value: np.ndarray) -> Var:
        var = Var(self, len(self._values), value)
        self._values.append(value)
        return var


LossFn = Callable[[Mapping[str, Var]], Var]
AuxLossFn = Callable[[Mapping[str, Var]], tuple[Var, Aux]]


def grad(loss_fn: LossFn, params: Mapping[str, Tensor]) -> dict[str, Tensor]:
    """Gradient of a scalar function of named parameters.

    Args:
        loss_fn: Function of the traced parameters built from ndgrad primitives.
        params: Parameter values by name.

    Returns:
        dict[str, Tensor]: Gradient per parameter, same shapes as the inputs.
    """
    _, _, grads = value_and_grad(lambda traced: (loss_fn(traced), None), params)
    return grads


def value_and_grad(
    loss_fn: AuxLossFn[Aux], params: Mapping[str, Tensor]
) -> tuple[float, Aux, dict[str, Tensor]]:
    """Evaluate a scalar loss with an auxiliary result and its gradient.

    Args:
        loss_fn: Function returning ``(scalar Var, aux)``.
        params: Parameter values by name.

    Returns:
        tuple[float, Aux, dict[str, Tensor]]: Loss value, the aux result and the
            gradient per parameter.
    """
    tape = GradTape()
    traced = {name: tape.watch(name, tensor) for name, tensor in params.items()}
    output, aux = loss_fn(traced)
    if not isinstance(output, Var):
        value = float(np.asarray(output).reshape(-1)[0])
        zeros = {name: Tensor.wrap(np.zeros(t.shape)) for name, t in params.items()}
        return value, aux, zeros
    adjoints = tape.gradient(output)
    grads = {name: Tensor.wrap(adjoints[name]) for name in params}
    return float(output.value.reshape(-1)[0]), aux, grads
