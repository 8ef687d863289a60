"""Error types raised by mmbench."""

from typing import Any, Dict, Optional


class MMError(ValueError):
    """Base class for every domain error; carries a machine-readable kind."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}

    @property
    def kind(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        """Convert to the error document printed by the CLI."""
        return {"error": self.kind, "message": str(self), "details": self.details}


class ShapeMismatch(MMError):
    pass


class AsymmetricDistance(MMError):
    pass


class TriangleViolation(MMError):
    pass


class NonpositiveWeight(MMError):
    pass


class MassNotOne(MMError):
    pass


class SizeOverflow(MMError):
    pass


class EmptySet(MMError):
    pass


class TooLargeForExact(MMError):
    pass


class TooLargeForOracle(MMError):
    pass


class DegenerateProfile(MMError):
    pass


class AnchorsNotLipschitz(MMError):
    pass


class HypothesisViolated(MMError):
    pass


class NotInformative(MMError):
    pass


class DisconnectedGraph(MMError):
    pass


class ConfigError(MMError):
    pass


class SpaceFileError(MMError):
    pass


class InvalidDistance(MMError):
    pass
