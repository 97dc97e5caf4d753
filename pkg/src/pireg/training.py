"""Mini-batch training with early stopping on a validation split.

Each epoch shuffles the training rows with its own seeded stream, walks the
batches, then scores the validation set.  The best-validation parameters are
kept and restored at the end, so the returned model is the early-stopping
winner, not the last iterate.  Non-finite losses or gradients abort with the
epoch/batch/member context attached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .config import ExperimentConfig
from .data import Dataset
from .errors import TrainingDiverged
from .network import (FeedForwardModel, backward, init_mean_variance_model,
                      init_model, loss_value)
from .optim import adam_step, decay_learning_rate, init_adam


@dataclass
class TrainingHistory:
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0


def build_model(config: ExperimentConfig, input_dim: int, seed) -> FeedForwardModel:
    """Fresh model of the right head shape for the configured variant."""
    hidden = list(config.model.hidden_sizes)
    if config.loss.variant == "gaussian_nll":
        return init_mean_variance_model([input_dim] + hidden + [2], seed)
    return init_model([input_dim] + hidden + [3], seed, config.model.head_bias)


def train_single(config: ExperimentConfig, train: Dataset,
                 valid: Optional[Dataset], seed) -> Tuple[FeedForwardModel, TrainingHistory]:
    """Train one model; returns the best-validation parameters and history.

    With no validation set the epoch-mean training loss drives early
    stopping instead.  patience=0 stops at the first epoch that fails to
    improve.
    """
    opt = config.optimizer
    model = build_model(config, train.dim, seed)
    state = init_adam(model, opt.learning_rate, opt.decay)
    shuffle_rng = np.random.default_rng([seed, 1])

    x, y = train.features, train.targets
    n = train.n
    history = TrainingHistory()
    best = np.inf
    best_params = None
    bad = 0

    for epoch in range(1, opt.max_epochs + 1):
        perm = shuffle_rng.permutation(n)
        batch_losses = []
        for batch_index, start in enumerate(range(0, n, opt.batch_size)):
            idx = perm[start:start + opt.batch_size]
            try:
                loss, grads = backward(model, x[idx], y[idx], config.loss)
                adam_step(state, model, grads)
            except TrainingDiverged as exc:
                raise TrainingDiverged(
                    f"diverged at epoch {epoch}, batch {batch_index}: {exc}",
                    epoch=epoch, batch_index=batch_index) from exc
            batch_losses.append(loss)
        epoch_loss = float(np.mean(batch_losses))

        if valid is not None and valid.n > 0:
            score = loss_value(model, valid.features, valid.targets, config.loss)
        else:
            score = epoch_loss
        if not np.isfinite(score):
            raise TrainingDiverged(
                f"non-finite validation loss {score!r} at epoch {epoch}", epoch=epoch)

        history.train_loss.append(epoch_loss)
        history.val_loss.append(float(score))
        history.epochs_run = epoch

        if score < best:
            best = score
            best_params = ([w.copy() for w in model.weights],
                           [b.copy() for b in model.biases])
            history.best_epoch = epoch
            bad = 0
        else:
            bad += 1
            if bad > opt.patience:
                break
        decay_learning_rate(state)

    if best_params is not None:
        model.weights = best_params[0]
        model.biases = best_params[1]
    return model, history


def train_ensemble(config: ExperimentConfig, train: Dataset, valid: Optional[Dataset],
                   base_seed) -> Tuple[List[FeedForwardModel], List[TrainingHistory]]:
    """Independently train ensemble_size members with seeds base_seed + j."""
    models, histories = [], []
    for j in range(config.ensemble_size):
        try:
            model, history = train_single(config, train, valid, base_seed + j)
        except TrainingDiverged as exc:
            raise TrainingDiverged(f"member {j}: {exc}", epoch=exc.epoch,
                                   batch_index=exc.batch_index, member=j) from exc
        models.append(model)
        histories.append(history)
    return models, histories


def carve_validation(train: Dataset, fraction: float, seed, split_index: int
                     ) -> Tuple[Dataset, Optional[Dataset]]:
    """Split a validation chunk off the training rows, deterministically."""
    if fraction <= 0.0 or train.n < 2:
        return train, None
    rng = np.random.default_rng([seed, split_index, 101])
    perm = rng.permutation(train.n)
    n_val = max(1, int(round(fraction * train.n)))
    n_val = min(n_val, train.n - 1)
    return train.take(perm[n_val:]), train.take(perm[:n_val])
