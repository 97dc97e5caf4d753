"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes, so keep the hierarchy flat and stable.
"""


class PiregError(Exception):
    """Base class for package-specific failures."""


class ConfigError(PiregError, ValueError):
    """Invalid configuration value or combination."""


class ShapeError(PiregError, ValueError):
    """Array dimensions do not match what an operation expects."""


class DataError(PiregError, ValueError):
    """A dataset file is missing, malformed, or contains non-finite values."""


class TrainingDiverged(PiregError, RuntimeError):
    """Loss or gradients became non-finite during optimization."""

    def __init__(self, message, epoch=None, batch_index=None, member=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch_index = batch_index
        self.member = member
