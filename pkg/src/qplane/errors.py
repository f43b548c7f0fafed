"""Shared exception types for the qplane package."""


class QPlaneError(Exception):
    """Base class for all package errors."""


class DenominatorVanishes(QPlaneError):
    """A scalar denominator evaluates to zero at the requested q value."""


class ArityMismatch(QPlaneError):
    """Series or space operands disagree on the number of coordinates."""


class FlavorUnavailable(QPlaneError):
    """The requested action flavor is not defined for this space."""


class GridIncompatible(QPlaneError):
    """A lattice operation needs a scaling that does not preserve the grid."""


class DegeneratePairing(QPlaneError):
    """A pairing norm vanished; the exponential cannot be built."""


class NonConvergent(QPlaneError):
    """A lattice sum's tail estimate exceeded the requested tolerance."""


class ExtrapolationUnstable(QPlaneError):
    """Richardson extrapolation over the regulator schedule did not settle."""


class ConvergenceRadiusExceeded(QPlaneError):
    """Pointwise series evaluation was requested outside the guarded radius."""


class UnknownSuite(QPlaneError):
    """The CLI was asked to run a check suite it does not know."""
