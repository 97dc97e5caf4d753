"""Datasets: synthetic generators, delimited-text loading, standardization.

Synthetic tasks follow the classic noisy-sine setup: targets are
1.5 * sin(x) with additive skew-normal noise, so the optimal point
prediction does not sit at the center of the optimal interval.  Tabular
ingestion reads plain delimited numeric text (one row per sample, optional
header) which covers the usual regression benchmark files once exported to
CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConfigError, DataError, ShapeError


@dataclass
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: Optional[List[str]] = None
    source_tag: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {self.features.shape}")
        if self.targets.ndim != 1:
            raise ShapeError(f"targets must be 1-D, got shape {self.targets.shape}")
        if self.features.shape[0] != self.targets.shape[0]:
            raise ShapeError(
                f"{self.features.shape[0]} feature rows but {self.targets.shape[0]} targets")
        if not np.all(np.isfinite(self.features)) or not np.all(np.isfinite(self.targets)):
            raise DataError(f"non-finite values in dataset {self.source_tag!r}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "Dataset":
        return Dataset(self.features[indices], self.targets[indices],
                       self.feature_names, self.source_tag)


@dataclass(frozen=True)
class NormStats:
    """Standardization statistics fit on a training portion only."""

    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: float
    target_std: float


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic shuffled split: (seed, split_index) fixes membership."""

    test_fraction: float = 0.1
    seed: int = 0
    split_index: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")


def sample_skew_normal(skew_alpha, rng, size=None):
    """Draw from the skew-normal density 2 * phi(x) * Phi(skew_alpha * x).

    Uses the two-Gaussian construction: with delta = a / sqrt(1 + a^2),
    the draw is delta * |z0| + sqrt(1 - delta^2) * z1 for independent
    standard normals z0, z1.  size=None returns a scalar.
    """
    skew_alpha = float(skew_alpha)
    if not math.isfinite(skew_alpha):
        raise ConfigError(f"skew_alpha must be finite, got {skew_alpha}")
    delta = skew_alpha / math.sqrt(1.0 + skew_alpha * skew_alpha)
    z0 = rng.standard_normal(size)
    z1 = rng.standard_normal(size)
    draw = delta * np.abs(z0) + math.sqrt(1.0 - delta * delta) * z1
    return float(draw) if size is None else draw


def _skew_normal_mean_std(skew_alpha):
    # Closed-form moments of the unit skew-normal used to standardize noise.
    delta = skew_alpha / math.sqrt(1.0 + skew_alpha * skew_alpha)
    mean = delta * math.sqrt(2.0 / math.pi)
    std = math.sqrt(1.0 - 2.0 * delta * delta / math.pi)
    return mean, std


def gen_sine(n=100, x_low=-2.0, x_high=2.0, noise_scale=0.3, skew_alpha=100.0, seed=0):
    """Noisy sine curve: y = 1.5 sin(x) + noise_scale * standardized skew draw.

    x is uniform on [x_low, x_high].  The noise draw is shifted and scaled to
    zero mean and unit variance before noise_scale is applied, so
    noise_scale=0 yields the pure curve.
    """
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    if not x_low < x_high:
        raise ConfigError(f"need x_low < x_high, got [{x_low}, {x_high}]")
    rng = np.random.default_rng(seed)
    x = rng.uniform(x_low, x_high, size=n)
    y = 1.5 * np.sin(x)
    if noise_scale != 0.0:
        mean, std = _skew_normal_mean_std(skew_alpha)
        noise = (sample_skew_normal(skew_alpha, rng, size=n) - mean) / std
        y = y + noise_scale * noise
    return Dataset(x.reshape(-1, 1), y, feature_names=["x"], source_tag="sine")


def gen_flat_skew(n=100, x_low=-2.0, x_high=2.0, noise_scale=1.0, skew_alpha=100.0, seed=0):
    """Skew-normal scatter around a flat zero mean over the same x range."""
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    if not x_low < x_high:
        raise ConfigError(f"need x_low < x_high, got [{x_low}, {x_high}]")
    rng = np.random.default_rng(seed)
    x = rng.uniform(x_low, x_high, size=n)
    y = noise_scale * sample_skew_normal(skew_alpha, rng, size=n)
    return Dataset(x.reshape(-1, 1), np.asarray(y), feature_names=["x"],
                   source_tag="flat_skew")


def _parse_cell(text, row, col, path):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{path}: non-numeric cell {text!r} at row {row}, column {col}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}: non-finite value {text!r} at row {row}, column {col}")
    return value


def _is_numeric_row(cells):
    for cell in cells:
        try:
            float(cell)
        except ValueError:
            return False
    return True


def load_delimited(path, target_column=-1, delimiter=","):
    """Load a delimited numeric table as (features, target) columns.

    The target column is selected by integer index (negative allowed) or by
    name when a header is present.  A header line is auto-detected when the
    first row has any non-numeric cell.  Ragged rows, non-numeric data
    cells, and non-finite values are rejected with located errors.
    """
    rows = []
    header = None
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            for line_no, cells in enumerate(reader, start=1):
                cells = [c.strip() for c in cells if c is not None]
                if not cells or all(c == "" for c in cells):
                    continue
                if line_no == 1 and not _is_numeric_row(cells):
                    header = cells
                    continue
                rows.append((line_no, cells))
    except FileNotFoundError:
        raise DataError(f"no such data file: {path}") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None

    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0][1])
    if width < 2:
        raise DataError(f"{path}: need at least two columns, got {width}")
    for line_no, cells in rows:
        if len(cells) != width:
            raise DataError(f"{path}: row {line_no} has {len(cells)} cells, expected {width}")

    if isinstance(target_column, str):
        if header is None:
            raise DataError(f"{path}: target column {target_column!r} needs a header line")
        try:
            target_idx = header.index(target_column)
        except ValueError:
            raise DataError(f"{path}: no column named {target_column!r} in header {header}") from None
    else:
        target_idx = int(target_column)
        if target_idx < 0:
            target_idx += width
        if not 0 <= target_idx < width:
            raise DataError(f"{path}: target column {target_column} out of range for width {width}")

    matrix = np.empty((len(rows), width))
    for i, (line_no, cells) in enumerate(rows):
        for j, cell in enumerate(cells):
            matrix[i, j] = _parse_cell(cell, line_no, j, path)

    keep = [j for j in range(width) if j != target_idx]
    names = None
    if header is not None:
        names = [header[j] for j in keep]
    return Dataset(matrix[:, keep], matrix[:, target_idx], feature_names=names,
                   source_tag=str(path))


def fit_normalize(train: Dataset) -> NormStats:
    """Per-column mean/std from the training portion; constant columns get std 1."""
    fmean = np.mean(train.features, axis=0)
    fstd = np.std(train.features, axis=0)
    fstd = np.where(fstd == 0.0, 1.0, fstd)
    tstd = float(np.std(train.targets))
    if tstd == 0.0:
        tstd = 1.0
    return NormStats(fmean, fstd, float(np.mean(train.targets)), tstd)


def apply_normalize(dataset: Dataset, stats: NormStats) -> Dataset:
    return Dataset(
        (dataset.features - stats.feature_mean) / stats.feature_std,
        (dataset.targets - stats.target_mean) / stats.target_std,
        dataset.feature_names,
        dataset.source_tag,
    )


def denormalize(dataset: Dataset, stats: NormStats) -> Dataset:
    return Dataset(
        dataset.features * stats.feature_std + stats.feature_mean,
        dataset.targets * stats.target_std + stats.target_mean,
        dataset.feature_names,
        dataset.source_tag,
    )


def denormalize_targets(values, stats: NormStats):
    """Map target-scale quantities (targets, bounds, predictions) back to
    original units."""
    return np.asarray(values, dtype=float) * stats.target_std + stats.target_mean


def split(dataset: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
    """Seeded shuffled split; the first ceil((1 - f) * n) rows are training."""
    n = dataset.n
    if n < 2:
        raise DataError(f"cannot split a dataset of {n} row(s)")
    rng = np.random.default_rng([spec.seed, spec.split_index])
    perm = rng.permutation(n)
    n_train = int(math.ceil((1.0 - spec.test_fraction) * n))
    n_train = min(max(n_train, 1), n - 1)
    return dataset.take(perm[:n_train]), dataset.take(perm[n_train:])


def save_delimited(dataset: Dataset, path, delimiter=","):
    """Write features plus a final target column, with a header line."""
    names = dataset.feature_names or [f"x{j}" for j in range(dataset.dim)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(list(names) + ["y"])
        for row, target in zip(dataset.features, dataset.targets):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])
