"""Exception types shared across the package."""


class WeblearnError(Exception):
    """Base class for all package errors."""


class DataError(WeblearnError):
    """Malformed or inconsistent dataset, curriculum, or embedding input."""


class ConfigError(WeblearnError):
    """Invalid configuration value or unknown configuration key."""


class TrainingError(WeblearnError):
    """Training could not proceed (degenerate weights, divergence)."""
