"""Exception types raised across the package."""

from __future__ import annotations


class JCSimError(Exception):
    """Base class for all package errors."""


class DimensionError(JCSimError, ValueError):
    """Operator or state dimensions are incompatible or exceed the configured limit."""


class DegenerateSteadyState(JCSimError):
    """The Liouvillian null space has dimension greater than one."""


class VanishingIntensity(JCSimError):
    """Steady-state photon number too small to normalise a correlator."""


class UnconvergedTail(JCSimError):
    """A correlator has not decayed at the end of the quadrature window."""


class StepTooLarge(JCSimError):
    """Single-step jump probability exceeds the allowed bound."""


class NormUnderflow(JCSimError):
    """Un-normalised trajectory state collapsed below the norm floor."""


class NoTriggers(JCSimError):
    """No usable counter triggers were found in the records."""


class TruncationLeak(JCSimError):
    """Wigner grid cannot be extended far enough to contain the state."""


class TrajectoryFailure(JCSimError):
    """A trajectory inside an ensemble failed; carries the trajectory index."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"trajectory {index} failed: {cause!r}")
        self.index = index
        self.cause = cause
