"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class VesselError(Exception):
    """Base class for every error raised by the package."""


class NonPositiveImGamma(VesselError):
    pass


class TruncationOverflow(VesselError):
    pass


class OrderTooHigh(VesselError):
    pass


class UnsupportedBackend(VesselError):
    pass


class BranchAmbiguity(VesselError):
    pass


class ThetaVanishes(VesselError):
    pass


class PoleHit(VesselError):
    pass


class CoincidentPoles(VesselError):
    pass


class FiberIncomplete(VesselError):
    pass


class RamifiedFiber(VesselError):
    pass


class PoleCollision(VesselError):
    pass


class SpectrumHit(VesselError):
    pass


class SingularBlock(VesselError):
    pass


class OrderingMismatch(VesselError):
    pass


class SingularCurvePoint(VesselError):
    pass


class OffCurve(VesselError):
    pass


class DegenerateDet(VesselError):
    pass


class QuadratureDivergence(VesselError):
    pass


class ConfigError(VesselError):
    """Scenario file problem; ``where`` names the offending field."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
