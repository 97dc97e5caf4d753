"""Adam optimizer with an exponential per-epoch learning-rate decay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import ConfigError, ShapeError, TrainingDiverged
from .network import FeedForwardModel, GradientSet


@dataclass
class AdamState:
    """Per-parameter moment accumulators plus the step counter.

    Moment lists mirror model.parameters() order (weights and biases
    interleaved per layer).  learning_rate is mutated by
    :func:`decay_learning_rate` at epoch boundaries.
    """

    first_moment: List[np.ndarray]
    second_moment: List[np.ndarray]
    step: int
    learning_rate: float
    decay: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(model: FeedForwardModel, learning_rate=0.01, decay=0.999,
              beta1=0.9, beta2=0.999, eps=1e-8) -> AdamState:
    if learning_rate <= 0.0:
        raise ConfigError(f"learning_rate must be positive, got {learning_rate}")
    if not 0.0 < decay <= 1.0:
        raise ConfigError(f"decay must lie in (0, 1], got {decay}")
    if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
        raise ConfigError("moment factors must lie in [0, 1)")
    params = model.parameters()
    return AdamState(
        first_moment=[np.zeros_like(p) for p in params],
        second_moment=[np.zeros_like(p) for p in params],
        step=0,
        learning_rate=float(learning_rate),
        decay=float(decay),
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(state: AdamState, model: FeedForwardModel, grads: GradientSet):
    """One bias-corrected Adam update, in place; returns (model, state).

    update = lr * m_hat / (sqrt(v_hat) + eps), with the usual 1 - beta^t
    corrections.  Raises on non-finite gradients rather than poisoning the
    accumulators.
    """
    params = model.parameters()
    gs = grads.parameters()
    if len(params) != len(state.first_moment) or len(params) != len(gs):
        raise ShapeError("gradient/state tensor count does not match the model")
    for p, g in zip(params, gs):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingDiverged("non-finite gradient")

    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for p, g, m, v in zip(params, gs, state.first_moment, state.second_moment):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return model, state


def decay_learning_rate(state: AdamState) -> AdamState:
    """Apply one epoch's exponential decay to the learning rate."""
    state.learning_rate *= state.decay
    return state
