"""Exception types shared across the package."""

from __future__ import annotations


class OracleUnavailableError(RuntimeError):
    """An environment was asked for an oracle it does not provide."""


class UnsupportedAlgorithmError(RuntimeError):
    """An algorithm requires an environment capability that is missing."""


class ConfigError(ValueError):
    """An experiment or diagnostics config document is invalid."""


class AggregationError(ValueError):
    """Trace aggregation was asked to combine incompatible traces."""
