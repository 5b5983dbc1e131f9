"""
Exception hierarchy shared by every hypcircle module.
"""

from typing import Any, Optional


class HypCircleError(Exception):
    """Base class for all errors raised by hypcircle."""


class GeometryError(HypCircleError):
    """Invalid input for the half-plane or the matrix group (y <= 0, det != 1, bad signature)."""


class GroupError(HypCircleError):
    """A lattice presentation failed its relation check or could not be parsed."""


class EnumerationCapError(GroupError):
    """Orbit enumeration reached its size cap; `partial` holds what was found so far."""

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class SamplingError(HypCircleError):
    """Rejection sampling became too inefficient to continue."""


class QuadratureError(HypCircleError):
    """The node cap was reached before the requested tolerance."""

    def __init__(
        self,
        message: str,
        estimate: Any = None,
        error_estimate: float = float("inf"),
        nodes_used: int = 0,
    ):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate
        self.nodes_used = nodes_used


class SpectralError(HypCircleError):
    """Inconsistent spectral parameters or an unattainable truncation horizon."""


class ObservableError(HypCircleError):
    """An observable could not be built with the requested parameters."""


class ConfigError(HypCircleError):
    """Invalid experiment configuration or command-line values."""
