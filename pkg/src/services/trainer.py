"""Training loop.

A run shuffles the training split with a per-epoch seed, takes Adam steps on
mini-batches of the five-term objective and, after every epoch, records the
full-split objective, train/test accuracy and both diversity scores. Epoch 0
is the freshly initialized model. The best epoch is the one with the highest
selection accuracy, the earliest on ties.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from src.core.config import settings
from src.core.errors import ConfigurationError, NumericError
from src.core.seeding import Stream, derive_seed, rng_for
from src.core.utils import get_run_logger
from src.ndgrad import Var, value_and_grad, value_of
from src.schemas.model import ModelConfig
from src.schemas.objective import LossWeights
from src.schemas.training import EpochMetrics, RunManifest, RunRecord, TrainConfig
from src.services.dataset import NUM_CLASSES, ImageDataset
from src.services.diversity import classification_report, diversity_report
from src.services.objective import breakdown, loss_terms
from src.services.optim import AdamConfig, AdamState, adam_step
from src.services.protomodel import (
    PrototypeModel,
    decode,
    encode,
    init,
    logits_from_latents,
)


def run_id_for(lambda_pd: float, seed: int) -> str:
    """Directory name of a run."""
    return f"lpd{lambda_pd:g}_seed{seed}"


def stratified_split(
    labels: ArrayLike, fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Split indices per class into a first and a second share.

    Each class contributes ``round(fraction * n_c)`` examples to the first share,
    at least one and leaving at least one for the second when it has two or more.

    Returns:
        tuple[np.ndarray, np.ndarray]: Sorted first-share and second-share indices.
    """
    y = np.asarray(labels, dtype=np.int64)
    rng = rng_for(seed, Stream.SPLIT)
    first: list[np.ndarray] = []
    second: list[np.ndarray] = []
    for k in np.unique(y):
        members = rng.permutation(np.flatnonzero(y == k))
        take = int(round(fraction * members.size))
        if members.size >= 2:
            take = min(max(take, 1), members.size - 1)
        first.append(members[:take])
        second.append(members[take:])
    return np.sort(np.concatenate(first)), np.sort(np.concatenate(second))


def model_config_for(config: TrainConfig, dataset: ImageDataset) -> ModelConfig:
    """Model extents of a run; the init seed is derived from the run seed."""
    return ModelConfig(
        input_dim=dataset.input_dim,
        latent_dim=config.latent_dim,
        num_prototypes=config.num_prototypes,
        num_classes=NUM_CLASSES,
        hidden_sizes=config.hidden_sizes,
        seed=derive_seed(config.seed, Stream.INIT),
    )


@dataclass(frozen=True)
class TrainState:
    """Everything needed to continue a run after ``epoch``."""

    model: PrototypeModel
    adam: AdamState
    epoch: int


@dataclass
class TrainResult:
    """Outcome of ``train``.

    Attributes:
        record: Metrics history and best epoch.
        final: State after the last completed epoch.
        best: Model of the best epoch.
        snapshots: Decoded prototypes (``m×p``) by epoch.
        neighbors: Training images nearest to each prototype at the final epoch.
        train_indices: Rows of the dataset used for fitting.
        test_indices: Held-out rows.
    """

    record: RunRecord
    final: TrainState
    best: PrototypeModel
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    neighbors: Optional[np.ndarray] = None
    train_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    test_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))


def _accuracy(model: PrototypeModel, latents: np.ndarray, data: ImageDataset) -> float:
    predicted = np.argmax(value_of(logits_from_latents(model, latents)), axis=1)
    return classification_report(predicted, data.labels, NUM_CLASSES).accuracy


def epoch_metrics(
    model: PrototypeModel,
    epoch: int,
    fit: ImageDataset,
    test: ImageDataset,
    selection: ImageDataset,
    weights: LossWeights,
) -> EpochMetrics:
    """Objective, accuracies and diversity of a model on the run's splits."""
    _, terms = loss_terms(model, fit.images, fit.labels, weights)
    latents = value_of(encode(model, fit.images))
    diversity = diversity_report(model.prototypes, latents, fit.labels, NUM_CLASSES)
    test_accuracy = _accuracy(model, value_of(encode(model, test.images)), test)
    if selection is test:
        selection_accuracy = test_accuracy
    else:
        selection_latents = value_of(encode(model, selection.images))
        selection_accuracy = _accuracy(model, selection_latents, selection)
    return EpochMetrics(
        epoch=epoch,
        train=breakdown(terms, weights),
        train_accuracy=_accuracy(model, latents, fit),
        test_accuracy=test_accuracy,
        selection_accuracy=selection_accuracy,
        psi_n=diversity.psi_n,
        psi_c=diversity.psi_c,
    )


def best_epoch(history: Sequence[EpochMetrics]) -> int:
    """Epoch with the highest selection accuracy; the earliest on ties."""
    best = history[0]
    for metrics in history[1:]:
        if metrics.selection_accuracy > best.selection_accuracy:
            best = metrics
    return best.epoch


def _objective(
    model: PrototypeModel,
    images: np.ndarray,
    labels: np.ndarray,
    weights: LossWeights,
    autoencoder_only: bool,
) -> Callable[[dict[str, Var]], tuple[Var, None]]:
    def loss_fn(traced: dict[str, Var]) -> tuple[Var, None]:
        total, terms = loss_terms(model, images, labels, weights, traced)
        output = terms["r"] if autoencoder_only else total
        assert isinstance(output, Var)
        return output, None

    return loss_fn


def _run_epoch(
    state: TrainState,
    fit: ImageDataset,
    config: TrainConfig,
    adam: AdamConfig,
) -> TrainState:
    epoch = state.epoch + 1
    order = rng_for(config.seed, Stream.EPOCH, epoch).permutation(len(fit))
    model, moments = state.model, state.adam
    for batch_index, start in enumerate(range(0, len(fit), config.batch_size)):
        rows = order[start : start + config.batch_size]
        loss_fn = _objective(
            model,
            fit.images[rows],
            fit.labels[rows],
            config.loss,
            config.autoencoder_only,
        )
        try:
            loss, _, grads = value_and_grad(loss_fn, model.params)
            if not np.isfinite(loss):
                raise NumericError(f"loss is {loss}")
            params, moments = adam_step(model.params, grads, moments, adam)
        except NumericError as e:
            raise NumericError(f"epoch {epoch} batch {batch_index}: {e}") from e
        model = model.replace(params)
    return TrainState(model=model, adam=moments, epoch=epoch)


def train(
    dataset: ImageDataset,
    config: TrainConfig,
    dataset_hash: str = "",
    resume: Optional[TrainState] = None,
    history: Sequence[EpochMetrics] = (),
    resume_best: Optional[PrototypeModel] = None,
) -> TrainResult:
    """Train one model on a stratified split of ``dataset``.

    Args:
        dataset: Labeled images.
        config: Protocol, including the master seed and loss weights.
        dataset_hash: Content hash recorded in the manifest.
        resume: State to continue from; later epochs then match an
            uninterrupted run exactly.
        history: Metrics of the epochs already covered by ``resume``.
        resume_best: Best model among those epochs.

    Returns:
        TrainResult: Metrics, final state, best model and snapshots. A run that
            hits a non-finite loss or gradient stops early; ``record.aborted``
            says where, and ``final`` is the last good state.

    Raises:
        ConfigurationError: If the prototype count cannot support the penalty or
            a batch would not fit in the training split.
    """
    if config.loss.lambda_pd > 0 and config.num_prototypes < 2:
        raise ConfigurationError("training with lambda_pd > 0 needs two prototypes")
    train_idx, test_idx = stratified_split(dataset.labels, config.split, config.seed)
    train_set, test_set = dataset.subset(train_idx), dataset.subset(test_idx)
    fit, selection = train_set, test_set
    if config.selection == "validation":
        fit_rows, val_rows = stratified_split(
            train_set.labels,
            1.0 - config.validation_fraction,
            derive_seed(config.seed, Stream.SPLIT, 1),
        )
        fit, selection = train_set.subset(fit_rows), train_set.subset(val_rows)
    if config.batch_size > len(fit):
        raise ConfigurationError(
            f"batch size {config.batch_size} exceeds the {len(fit)} training examples"
        )

    model_config = model_config_for(config, dataset)
    adam = AdamConfig(
        learning_rate=config.learning_rate,
        beta1=config.adam_beta1,
        beta2=config.adam_beta2,
        epsilon=config.adam_epsilon,
    )
    run_id = run_id_for(config.loss.lambda_pd, config.seed)
    log = get_run_logger(run_id)
    manifest = RunManifest(
        run_id=run_id,
        tool_version=settings.VERSION,
        config=config,
        dataset_hash=dataset_hash,
        seed=config.seed,
        model=model_config,
    )

    if resume is None:
        model = init(model_config)
        state = TrainState(model=model, adam=AdamState.zeros(model.params), epoch=0)
        records = [epoch_metrics(model, 0, fit, test_set, selection, config.loss)]
    else:
        state = resume
        log.info("resuming after epoch %s", resume.epoch)
        records = [m for m in history if m.epoch <= resume.epoch]
        if not records or records[-1].epoch != resume.epoch:
            records.append(
                epoch_metrics(
                    resume.model, resume.epoch, fit, test_set, selection, config.loss
                )
            )
    snapshot_epochs = {e for e in config.snapshot_epochs if e <= config.epochs}
    snapshot_epochs.add(config.epochs)
    snapshots: dict[int, np.ndarray] = {}
    best_model = resume_best if resume_best is not None else state.model

    def snapshot(s: TrainState) -> None:
        if s.epoch in snapshot_epochs:
            snapshots[s.epoch] = value_of(decode(s.model, s.model.prototypes))

    snapshot(state)
    aborted: Optional[str] = None
    while state.epoch < config.epochs:
        try:
            next_state = _run_epoch(state, fit, config, adam)
        except NumericError as e:
            aborted = str(e)
            log.error("training aborted at %s", aborted)
            break
        state = next_state
        metrics = epoch_metrics(
            state.model, state.epoch, fit, test_set, selection, config.loss
        )
        records.append(metrics)
        log.info(
            "epoch %s: loss %.4f (e %.4f r %.4f r1 %.4f r2 %.4f pdl %.4f) "
            "train %.3f test %.3f psi_n %.3f psi_c %.3f",
            state.epoch,
            metrics.train.total,
            metrics.train.e,
            metrics.train.r,
            metrics.train.r1,
            metrics.train.r2,
            metrics.train.pdl,
            metrics.train_accuracy,
            metrics.test_accuracy,
            metrics.psi_n,
            metrics.psi_c,
        )
        snapshot(state)
        if best_epoch(records) == state.epoch:
            best_model = state.model

    if aborted is not None:
        snapshots[state.epoch] = value_of(decode(state.model, state.model.prototypes))
    latents = value_of(encode(state.model, fit.images))
    neighbor_of = diversity_report(
        state.model.prototypes, latents, fit.labels, NUM_CLASSES
    ).neighbor_of
    record = RunRecord(
        run_id=run_id,
        epochs=records,
        best_epoch=best_epoch(records),
        manifest=manifest,
        aborted=aborted,
    )
    return TrainResult(
        record=record,
        final=state,
        best=best_model,
        snapshots=snapshots,
        neighbors=fit.images[neighbor_of],
        train_indices=train_idx,
        test_indices=test_idx,
    )
