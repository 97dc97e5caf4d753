"""Training objectives for interval-plus-value regression.

The interval loss rewards narrow intervals over the samples they capture and
penalises coverage falling short of the 1 - alpha target:

    width_term + sqrt(n) * coverage_penalty * max(0, (1 - alpha) - soft_picp)^2

where the width term averages (upper - lower) over the hard capture set and
soft_picp is the mean of the logistic capture relaxation.  The value loss
scores the point prediction mix * upper + (1 - mix) * lower against targets,
and the joint objective is a convex combination of the two.

Every public loss has a matching analytic head gradient (via
``head_loss_and_grad``) so the network module never needs to know the loss
internals.  Gradients treat the hard capture vector as locally constant; it
is piecewise constant in the parameters, so this is exact almost everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ShapeError

VARIANTS = ("joint", "interval_only", "midpoint", "decoupled", "gaussian_nll")
POINT_LOSSES = ("squared", "absolute")

# Guards the captured-width denominator when no sample is captured: the
# numerator is identically zero there, so the term contributes 0 and the
# coverage penalty alone drives training.
CAPTURE_EPS = 1e-7

# Keeps the mixing weight strictly inside (0, 1) even when the logistic
# saturates in float64.
MIX_EPS = 1e-12

# Floor added to the softplus link of the variance head.
VARIANCE_FLOOR = 1e-6


def sigmoid(x):
    """Logistic function, stable for large |x|."""
    x = np.asarray(x, dtype=float)
    pos = np.where(x >= 0, x, 0.0)
    neg = np.where(x < 0, x, 0.0)
    ex = np.exp(neg)
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-pos)), ex / (1.0 + ex))


def softplus(x):
    """log(1 + exp(x)) without overflow."""
    x = np.asarray(x, dtype=float)
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


@dataclass(frozen=True)
class LossConfig:
    """Hyperparameters shared by every training objective.

    alpha is the target miscoverage (intervals should contain targets with
    probability 1 - alpha), coverage_penalty trades interval width against
    coverage, soften scales the logistic capture relaxation, and
    interval_weight mixes the interval loss with the value loss in the
    joint objective.
    """

    alpha: float = 0.05
    coverage_penalty: float = 15.0
    soften: float = 160.0
    interval_weight: float = 0.5
    variant: str = "joint"
    point_loss: str = "squared"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.coverage_penalty <= 0.0:
            raise ConfigError(f"coverage_penalty must be positive, got {self.coverage_penalty}")
        if self.soften <= 0.0:
            raise ConfigError(f"soften must be positive, got {self.soften}")
        if not 0.0 <= self.interval_weight <= 1.0:
            raise ConfigError(f"interval_weight must lie in [0, 1], got {self.interval_weight}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.point_loss not in POINT_LOSSES:
            raise ConfigError(f"unknown point_loss {self.point_loss!r}; expected one of {POINT_LOSSES}")


@dataclass
class PIOutput:
    """Per-sample interval bounds plus the derived point prediction.

    ``mix`` is the weight placed on the upper bound; the point prediction is
    lower + mix * (upper - lower), so it always lies inside the interval.
    ``mix_logit`` keeps the raw head (pre-logistic); the decoupled variant
    reads it as a direct value output.
    """

    upper: np.ndarray
    lower: np.ndarray
    mix: np.ndarray
    value: np.ndarray = field(default=None)  # type: ignore[assignment]
    mix_logit: Optional[np.ndarray] = None

    def __post_init__(self):
        self.upper = np.asarray(self.upper, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.mix = np.asarray(self.mix, dtype=float)
        if not self.upper.shape == self.lower.shape == self.mix.shape:
            raise ShapeError("upper, lower, and mix must have identical shapes")
        if self.value is None:
            self.value = value_prediction(self.mix, self.upper, self.lower)

    def __len__(self):
        return self.upper.shape[0]


def pi_output(raw):
    """Interpret an (n, 3) raw head matrix as a :class:`PIOutput`.

    Columns are (upper, lower, mix-logit) in that order; the logit is pushed
    through the logistic function and clipped to stay strictly inside (0, 1).
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[1] != 3:
        raise ShapeError(f"expected an (n, 3) head matrix, got shape {raw.shape}")
    upper, lower, logit = raw[:, 0], raw[:, 1], raw[:, 2]
    mix = squash_mix(logit)
    return PIOutput(upper=upper, lower=lower, mix=mix, mix_logit=logit)


def squash_mix(logit):
    """Map the raw mixing head into (0, 1), never touching the endpoints."""
    return np.clip(sigmoid(logit), MIX_EPS, 1.0 - MIX_EPS)


def _aligned(*arrays):
    out = [np.asarray(a, dtype=float) for a in arrays]
    first = out[0].shape
    for a in out[1:]:
        if a.shape != first:
            raise ShapeError(f"length mismatch: {first} vs {a.shape}")
    return out


def hard_capture(y, lower, upper):
    """Indicator vector: 1.0 where lower <= y <= upper (inclusive), else 0.0."""
    y, lower, upper = _aligned(y, lower, upper)
    return ((lower <= y) & (y <= upper)).astype(float)


def soft_capture(y, lower, upper, soften):
    """Logistic relaxation of the capture indicator.

    Elementwise product sigmoid(soften * (y - lower)) * sigmoid(soften * (upper - y));
    approaches the hard indicator as soften grows.
    """
    if soften <= 0.0:
        raise ConfigError(f"soften must be positive, got {soften}")
    y, lower, upper = _aligned(y, lower, upper)
    return sigmoid(soften * (y - lower)) * sigmoid(soften * (upper - y))


def captured_mpiw(upper, lower, captured):
    """Mean interval width over captured samples; 0.0 when nothing is captured."""
    upper, lower, captured = _aligned(upper, lower, captured)
    denom = max(float(np.sum(captured)), CAPTURE_EPS)
    return float(np.sum((upper - lower) * captured) / denom)


def value_prediction(mix, upper, lower):
    """Point prediction lower + mix * (upper - lower).

    Written in this form so the result is exactly the common bound when
    upper == lower, and never escapes [min(lower, upper), max(lower, upper)]
    for mix in (0, 1).
    """
    mix, upper, lower = _aligned(mix, upper, lower)
    if np.any(mix <= 0.0) or np.any(mix >= 1.0):
        raise ConfigError("mix weights must lie strictly inside (0, 1)")
    return lower + mix * (upper - lower)


# ---------------------------------------------------------------------------
# Loss terms with analytic head gradients.  Each _*_terms helper returns the
# scalar loss followed by its partials with respect to the head columns; the
# public loss functions reuse the same helpers so values agree bit-for-bit
# with the gradient path.
# ---------------------------------------------------------------------------


def _interval_terms(upper, lower, y, cfg):
    n = y.shape[0]
    k_hard = ((lower <= y) & (y <= upper)).astype(float)
    denom = max(float(np.sum(k_hard)), CAPTURE_EPS)
    width_term = float(np.sum((upper - lower) * k_hard) / denom)

    a = sigmoid(cfg.soften * (y - lower))
    b = sigmoid(cfg.soften * (upper - y))
    picp_soft = float(np.mean(a * b))
    gap = (1.0 - cfg.alpha) - picp_soft
    hinge = max(gap, 0.0)
    loss = width_term + math.sqrt(n) * cfg.coverage_penalty * hinge * hinge

    d_upper = k_hard / denom
    d_lower = -k_hard / denom
    if hinge > 0.0:
        scale = -2.0 * math.sqrt(n) * cfg.coverage_penalty * hinge / n
        d_upper = d_upper + scale * (a * b * (1.0 - b) * cfg.soften)
        d_lower = d_lower + scale * (-a * (1.0 - a) * b * cfg.soften)
    return loss, d_upper, d_lower


def _point_terms(pred, y, kind):
    r = pred - y
    if kind == "squared":
        return r * r, 2.0 * r
    if kind == "absolute":
        return np.abs(r), np.sign(r)
    raise ConfigError(f"unknown point_loss {kind!r}")


def _value_terms(upper, lower, mix, y, cfg):
    n = y.shape[0]
    pred = lower + mix * (upper - lower)
    per_sample, d_pred = _point_terms(pred, y, cfg.point_loss)
    loss = float(np.mean(per_sample))
    w = d_pred / n
    return loss, w * mix, w * (1.0 - mix), w * (upper - lower)


def interval_loss(output, y, cfg):
    """Captured-width term plus the coverage-shortfall penalty."""
    y = np.asarray(y, dtype=float)
    return _interval_terms(output.upper, output.lower, y, cfg)[0]


def value_loss(output, y, cfg):
    """Mean point loss of the in-interval value prediction against targets."""
    y = np.asarray(y, dtype=float)
    return _value_terms(output.upper, output.lower, output.mix, y, cfg)[0]


def joint_loss(output, y, cfg):
    """interval_weight * interval_loss + (1 - interval_weight) * value_loss."""
    return _compose(cfg, interval_loss(output, y, cfg), value_loss(output, y, cfg))


def interval_only_loss(output, y, cfg):
    """Interval loss alone; at inference this variant reports the interval midpoint."""
    return interval_loss(output, y, cfg)


def midpoint_loss(output, y, cfg):
    """Joint loss with the mixing weight pinned at 0.5 (the head is ignored)."""
    y = np.asarray(y, dtype=float)
    half = np.full_like(output.upper, 0.5)
    li = _interval_terms(output.upper, output.lower, y, cfg)[0]
    lv = _value_terms(output.upper, output.lower, half, y, cfg)[0]
    return _compose(cfg, li, lv)


def decoupled_loss(output, y, cfg):
    """Interval loss plus a point loss on the raw third head read as a value.

    The raw head is used pre-logistic: a (0, 1)-bounded output cannot regress
    standardized targets.  Requires ``output.mix_logit``.
    """
    if output.mix_logit is None:
        raise ConfigError("decoupled loss needs the raw mixing head (mix_logit)")
    y = np.asarray(y, dtype=float)
    li = _interval_terms(output.upper, output.lower, y, cfg)[0]
    per_sample, _ = _point_terms(np.asarray(output.mix_logit, dtype=float), y, cfg.point_loss)
    return li + float(np.mean(per_sample))


def gaussian_nll(mean, variance, y):
    """Negative log likelihood of independent Gaussians, constants dropped.

    Mean over the batch of 0.5 * log(variance) + (y - mean)^2 / (2 * variance).
    """
    mean, variance, y = _aligned(mean, variance, y)
    if np.any(variance <= 0.0):
        raise ValueError("variance must be strictly positive")
    return float(np.mean(0.5 * np.log(variance) + (y - mean) ** 2 / (2.0 * variance)))


def _compose(cfg, li, lv):
    return cfg.interval_weight * li + (1.0 - cfg.interval_weight) * lv


def _gaussian_terms(raw, y):
    n = y.shape[0]
    mean = raw[:, 0]
    vraw = raw[:, 1]
    variance = softplus(vraw) + VARIANCE_FLOOR
    resid = y - mean
    loss = float(np.mean(0.5 * np.log(variance) + resid * resid / (2.0 * variance)))
    d_mean = (mean - y) / variance / n
    d_var = (0.5 / variance - 0.5 * resid * resid / (variance * variance)) / n
    d_vraw = d_var * sigmoid(vraw)
    grad = np.column_stack([d_mean, d_vraw])
    return loss, grad


def gaussian_link(raw):
    """Map a raw (n, 2) head matrix to (mean, variance) with a softplus link."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise ShapeError(f"expected an (n, 2) head matrix, got shape {raw.shape}")
    return raw[:, 0], softplus(raw[:, 1]) + VARIANCE_FLOOR


def head_loss(raw, y, cfg):
    """Loss value alone, through the same arithmetic path as the gradient."""
    return head_loss_and_grad(raw, y, cfg)[0]


def point_prediction(output, variant):
    """The value prediction a given training variant reports at inference.

    The joint objective reports the learned in-interval combination; the
    interval-only and pinned-midpoint variants report the interval midpoint;
    the decoupled variant reports its raw third head directly.
    """
    if variant in ("joint",):
        return output.value
    if variant in ("interval_only", "midpoint"):
        return output.lower + 0.5 * (output.upper - output.lower)
    if variant == "decoupled":
        if output.mix_logit is None:
            raise ConfigError("decoupled reporting needs the raw mixing head (mix_logit)")
        return np.asarray(output.mix_logit, dtype=float)
    raise ConfigError(f"no point prediction rule for variant {variant!r}")


def head_loss_and_grad(raw, y, cfg):
    """Loss value plus its gradient with respect to the raw head matrix.

    ``raw`` has columns (upper, lower, mix-logit) for the interval variants
    and (mean, raw-variance) for gaussian_nll.  This is the single entry
    point the network's backward pass uses.
    """
    raw = np.asarray(raw, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or raw.ndim != 2 or raw.shape[0] != y.shape[0]:
        raise ShapeError(f"head matrix {raw.shape} does not match targets {y.shape}")
    if y.shape[0] < 1:
        raise ShapeError("batch must be non-empty")

    if cfg.variant == "gaussian_nll":
        if raw.shape[1] != 2:
            raise ShapeError("gaussian_nll needs a 2-column head matrix")
        return _gaussian_terms(raw, y)

    if raw.shape[1] != 3:
        raise ShapeError("interval variants need a 3-column head matrix")
    upper, lower, logit = raw[:, 0], raw[:, 1], raw[:, 2]
    mix = squash_mix(logit)

    li, di_u, di_l = _interval_terms(upper, lower, y, cfg)
    grad = np.zeros_like(raw)

    if cfg.variant == "interval_only":
        loss = li
        grad[:, 0] = di_u
        grad[:, 1] = di_l
    elif cfg.variant == "joint":
        lv, dv_u, dv_l, dv_mix = _value_terms(upper, lower, mix, y, cfg)
        loss = _compose(cfg, li, lv)
        w = cfg.interval_weight
        grad[:, 0] = w * di_u + (1.0 - w) * dv_u
        grad[:, 1] = w * di_l + (1.0 - w) * dv_l
        grad[:, 2] = (1.0 - w) * dv_mix * mix * (1.0 - mix)
    elif cfg.variant == "midpoint":
        half = np.full_like(upper, 0.5)
        lv, dv_u, dv_l, _ = _value_terms(upper, lower, half, y, cfg)
        loss = _compose(cfg, li, lv)
        w = cfg.interval_weight
        grad[:, 0] = w * di_u + (1.0 - w) * dv_u
        grad[:, 1] = w * di_l + (1.0 - w) * dv_l
    elif cfg.variant == "decoupled":
        per_sample, d_pred = _point_terms(logit, y, cfg.point_loss)
        loss = li + float(np.mean(per_sample))
        grad[:, 0] = di_u
        grad[:, 1] = di_l
        grad[:, 2] = d_pred / y.shape[0]
    else:  # pragma: no cover - guarded by LossConfig validation
        raise ConfigError(f"unknown variant {cfg.variant!r}")
    return loss, grad
