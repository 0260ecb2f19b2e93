"""Autoencoder-prototype model.

An encoder ``f`` maps flattened images to latent codes, a mirror-image decoder
``g`` maps codes back to pixels, and the classifier turns squared distances to
``m`` learned prototypes into class logits through a bias-free linear layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from src.core.errors import DimensionError, InputValidationError
from src.ndgrad import (
    Operand,
    Tensor,
    add,
    matmul,
    pairwise_sq_dist,
    sigmoid,
    transpose,
    value_of,
)
from src.schemas.model import ModelConfig

PROTOTYPES = "prototypes"
CLASSIFIER = "classifier"

ParamView = Mapping[str, Operand]


def layer_dims(
    config: ModelConfig,
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Fan-in/fan-out of every encoder and decoder layer."""
    widths = [config.input_dim, *config.hidden_sizes, config.latent_dim]
    encoder = list(zip(widths[:-1], widths[1:]))
    decoder = [(fan_out, fan_in) for fan_in, fan_out in reversed(encoder)]
    return encoder, decoder


def parameter_names(config: ModelConfig) -> list[str]:
    """Parameter names in checkpoint order.

    Encoder weight/bias pairs ``enc0``..``enc3``, decoder pairs ``dec0``..``dec3``,
    then the prototype matrix and the classifier weight.
    """
    encoder, decoder = layer_dims(config)
    names: list[str] = []
    for prefix, layers in (("enc", encoder), ("dec", decoder)):
        for i in range(len(layers)):
            names += [f"{prefix}{i}.weight", f"{prefix}{i}.bias"]
    return [*names, PROTOTYPES, CLASSIFIER]


def parameter_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Expected shape of every parameter, in checkpoint order."""
    encoder, decoder = layer_dims(config)
    shapes: dict[str, tuple[int, ...]] = {}
    for prefix, layers in (("enc", encoder), ("dec", decoder)):
        for i, (fan_in, fan_out) in enumerate(layers):
            shapes[f"{prefix}{i}.weight"] = (fan_in, fan_out)
            shapes[f"{prefix}{i}.bias"] = (fan_out,)
    shapes[PROTOTYPES] = (config.num_prototypes, config.latent_dim)
    shapes[CLASSIFIER] = (config.num_classes, config.num_prototypes)
    return shapes


@dataclass(frozen=True)
class PrototypeModel:
    """Model parameters and the extents they were built for.

    A model is an immutable value: training produces new models.

    Attributes:
        config: Model extents.
        params: Parameter tensors by name, in checkpoint order.
    """

    config: ModelConfig
    params: Mapping[str, Tensor]

    def __post_init__(self) -> None:
        expected = parameter_shapes(self.config)
        if list(self.params) != list(expected):
            raise DimensionError(
                f"parameters {list(self.params)} do not match {list(expected)}"
            )
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise DimensionError(
                    f"parameter {name}: expected {list(shape)}, "
                    f"got {list(self.params[name].shape)}"
                )

    @property
    def prototypes(self) -> Tensor:
        """Prototype matrix ``P`` (m×q)."""
        return self.params[PROTOTYPES]

    @property
    def classifier(self) -> Tensor:
        """Classifier weight ``W`` (K×m)."""
        return self.params[CLASSIFIER]

    def replace(self, params: Mapping[str, Tensor]) -> PrototypeModel:
        """Return a model with the given parameters, keeping checkpoint order."""
        ordered = {name: params[name] for name in parameter_names(self.config)}
        return PrototypeModel(self.config, ordered)


def init(config: ModelConfig) -> PrototypeModel:
    """Build a model fully determined by ``config.seed``.

    Affine weights are drawn from ``Uniform(-a, a)`` with
    ``a = sqrt(6 / (fan_in + fan_out))``, biases are zero, prototypes are
    ``Uniform(0, 1)`` and the classifier holds ``-1`` on a round-robin
    class-to-prototype assignment (prototype ``j`` serves class ``j mod K``).
    """
    rng = np.random.default_rng(config.seed)
    encoder, decoder = layer_dims(config)
    params: dict[str, Tensor] = {}
    for prefix, layers in (("enc", encoder), ("dec", decoder)):
        for i, (fan_in, fan_out) in enumerate(layers):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            params[f"{prefix}{i}.weight"] = Tensor.wrap(
                rng.uniform(-bound, bound, size=(fan_in, fan_out))
            )
            params[f"{prefix}{i}.bias"] = Tensor.wrap(np.zeros(fan_out))
    params[PROTOTYPES] = Tensor.wrap(
        rng.uniform(0.0, 1.0, size=(config.num_prototypes, config.latent_dim))
    )
    weight = np.zeros((config.num_classes, config.num_prototypes))
    prototype_index = np.arange(config.num_prototypes)
    weight[prototype_index % config.num_classes, prototype_index] = -1.0
    params[CLASSIFIER] = Tensor.wrap(weight)
    return PrototypeModel(config, params)


def _mlp(params: ParamView, prefix: str, count: int, x: Operand) -> Operand:
    for i in range(count):
        affine = matmul(x, params[f"{prefix}{i}.weight"])
        x = sigmoid(add(affine, params[f"{prefix}{i}.bias"]))
    return x


def _check_batch(batch: Operand, width: int, what: str) -> None:
    shape = value_of(batch).shape
    if len(shape) != 2 or shape[1] != width:
        raise DimensionError(f"{what}: expected [n, {width}], got {list(shape)}")


def encode(
    model: PrototypeModel, batch: Operand, params: Optional[ParamView] = None
) -> Operand:
    """Latent codes of a batch of flattened images.

    Args:
        model: Model whose extents and (by default) parameters are used.
        batch: ``n×p`` pixels in ``[0, 1]``.
        params: Traced parameter view overriding ``model.params``.

    Returns:
        Operand: ``n×q`` codes in ``(0, 1)``.

    Raises:
        DimensionError: If the batch width is not ``p``.
        InputValidationError: If a pixel lies outside ``[0, 1]``.
    """
    _check_batch(batch, model.config.input_dim, "encode")
    pixels = value_of(batch)
    if np.any(pixels < 0.0) or np.any(pixels > 1.0):
        raise InputValidationError("encode: pixels must lie in [0, 1]")
    view = model.params if params is None else params
    return _mlp(view, "enc", len(model.config.hidden_sizes) + 1, batch)


def decode(
    model: PrototypeModel, z: Operand, params: Optional[ParamView] = None
) -> Operand:
    """Pixels reconstructed from latent codes.

    Used both for reconstruction and for rendering learned prototypes.

    Returns:
        Operand: ``n×p`` pixels in ``(0, 1)``.
    """
    _check_batch(z, model.config.latent_dim, "decode")
    view = model.params if params is None else params
    return _mlp(view, "dec", len(model.config.hidden_sizes) + 1, z)


def logits_from_latents(
    model: PrototypeModel, z: Operand, params: Optional[ParamView] = None
) -> Operand:
    """Class logits ``pairwise_sq_dist(z, P) @ W.T`` for given latent codes."""
    view = model.params if params is None else params
    distances = pairwise_sq_dist(z, view[PROTOTYPES])
    return matmul(distances, transpose(view[CLASSIFIER]))


def classify(
    model: PrototypeModel, batch: Operand, params: Optional[ParamView] = None
) -> Operand:
    """Class logits of a batch of flattened images (``n×K``)."""
    return logits_from_latents(model, encode(model, batch, params), params)


def predict(model: PrototypeModel, batch: Operand) -> np.ndarray:
    """Predicted class per row; ties go to the lowest class index."""
    return np.argmax(value_of(classify(model, batch)), axis=1)
