"""Aggregation of independently trained members into one widened interval.

Interval members are combined by averaging bounds and widening each side by
z * (across-member standard deviation of that bound), which treats the M
bound estimates as a small sample and stretches the interval to cover their
uncertainty.  Mean-variance members are combined as an equal-weight Gaussian
mixture whose moments give a single predictive normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, ShapeError
from .losses import PIOutput


@dataclass
class EnsembleOutput:
    """Widened per-sample interval plus the averaged value prediction.

    sigma_upper / sigma_lower hold the spread estimate each side was widened
    by (across-member std for interval members, mixture std for gaussian
    members).
    """

    upper: np.ndarray
    lower: np.ndarray
    value: np.ndarray
    sigma_upper: np.ndarray
    sigma_lower: np.ndarray


# Rational approximation of the standard normal quantile (Acklam's
# coefficients), refined below by one Halley step against the erfc-based CDF.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _poly(coeffs, x):
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF, absolute error well under 1e-8."""
    if not 0.0 < p < 1.0:
        raise ConfigError(f"quantile argument must lie in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = _poly(_C, q) / (_poly(_D, q) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = _poly(_A, r) * q / (_poly(_B, r) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -_poly(_C, q) / (_poly(_D, q) * q + 1.0)
    # One Halley refinement using the exact CDF via erfc.
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def z_score(alpha: float) -> float:
    """Two-sided standard-normal multiplier: the 1 - alpha/2 quantile."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    return normal_quantile(1.0 - alpha / 2.0)


def _stack(member_outputs: Sequence[PIOutput]):
    if len(member_outputs) < 1:
        raise ShapeError("need at least one member")
    n = len(member_outputs[0])
    for out in member_outputs:
        if len(out) != n:
            raise ShapeError("members disagree on sample count")
    uppers = np.stack([o.upper for o in member_outputs])
    lowers = np.stack([o.lower for o in member_outputs])
    return uppers, lowers


def _spread(stacked):
    # Sample std across members (divisor M - 1); a single member carries no
    # spread information, so M = 1 is defined as zero spread.
    if stacked.shape[0] == 1:
        return np.zeros(stacked.shape[1])
    return np.std(stacked, axis=0, ddof=1)


def aggregate_pi(member_outputs: Sequence[PIOutput], alpha: float,
                 member_values: Optional[Sequence[np.ndarray]] = None) -> EnsembleOutput:
    """Combine interval members: average bounds, widen each by z * spread.

    member_values overrides the per-member value predictions entering the
    average (used by variants that report something other than the learned
    combination); defaults to each member's own value field.
    """
    uppers, lowers = _stack(member_outputs)
    if member_values is None:
        values = np.stack([o.value for o in member_outputs])
    else:
        values = np.stack([np.asarray(v, dtype=float) for v in member_values])
        if values.shape != uppers.shape:
            raise ShapeError("member_values shape does not match member outputs")
    z = z_score(alpha)
    sigma_u = _spread(uppers)
    sigma_l = _spread(lowers)
    return EnsembleOutput(
        upper=np.mean(uppers, axis=0) + z * sigma_u,
        lower=np.mean(lowers, axis=0) - z * sigma_l,
        value=np.mean(values, axis=0),
        sigma_upper=sigma_u,
        sigma_lower=sigma_l,
    )


def aggregate_gaussian(member_means, member_variances, alpha: float) -> EnsembleOutput:
    """Combine mean-variance members as an equal-weight Gaussian mixture.

    The mixture moments are mu* = mean of member means and
    sigma*^2 = mean(variance_j) + mean((mu_j - mu*)^2), written in the
    cancellation-free form; the interval is mu* +- z * sigma*.
    """
    means = np.atleast_2d(np.asarray(member_means, dtype=float))
    variances = np.atleast_2d(np.asarray(member_variances, dtype=float))
    if means.shape != variances.shape:
        raise ShapeError(f"means {means.shape} and variances {variances.shape} disagree")
    if np.any(variances <= 0.0):
        raise ValueError("member variances must be strictly positive")
    mu = np.mean(means, axis=0)
    var = np.mean(variances, axis=0) + np.mean((means - mu) ** 2, axis=0)
    sigma = np.sqrt(var)
    z = z_score(alpha)
    return EnsembleOutput(
        upper=mu + z * sigma,
        lower=mu - z * sigma,
        value=mu,
        sigma_upper=sigma,
        sigma_lower=sigma,
    )
