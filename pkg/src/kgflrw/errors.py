"""Exception types shared across the package.

Every error raised on purpose derives from KGFLRWError so callers can catch
package failures without masking genuine bugs.
"""

from __future__ import annotations


class KGFLRWError(Exception):
    """Base class for package-specific errors."""


class NegativeTime(KGFLRWError):
    """Scale factor evaluated at t < 0."""


class TimeBeyondHorizon(KGFLRWError):
    """Scale factor evaluated at or past the end of its domain of validity."""


class NoAdmissibleT0(KGFLRWError):
    """No start time can satisfy the expansion-rate threshold."""


class ComplexInputToRealNonlinearity(KGFLRWError):
    """A real-only nonlinearity received data with a non-negligible imaginary part."""


class NonRealLambdaNoPotential(KGFLRWError):
    """The potential (antiderivative) is undefined for a non-real coupling."""


class GridMismatch(KGFLRWError):
    """Two fields live on different grids."""


class WidthTooLarge(KGFLRWError):
    """Localized profile width does not fit inside the box."""


class WidthTooSmall(KGFLRWError):
    """Localized profile width is unresolvable on the grid (under 4 cells)."""


class EmptyTrace(KGFLRWError):
    """A trace-consuming operation received no samples."""


class TooFewSamples(KGFLRWError):
    """Sampled-signal check needs at least 3 points for finite differences."""


class MasslessHdiag(KGFLRWError):
    """The growth diagnostic divides by |m| and is undefined for m = 0."""


class HorizonTooShort(KGFLRWError):
    """The certified bound falls past the background's horizon.

    Carries the partially filled hypothesis report in ``report`` when available.
    """

    def __init__(self, msg: str, report=None):
        super().__init__(msg)
        self.report = report


class CalibrationFailed(KGFLRWError):
    """Amplitude calibration could not push the target above its margin."""


class CflViolation(KGFLRWError):
    """Requested step exceeds the stability limit of the explicit scheme."""


class NonFiniteState(KGFLRWError):
    """NaN or Inf appeared in the evolved field."""


class WrapAroundRisk(KGFLRWError):
    """The light cone of localized data is about to wrap around the torus.

    Carries the trace accumulated so far in ``trace`` when available.
    """

    def __init__(self, msg: str, trace=None):
        super().__init__(msg)
        self.trace = trace


class NoVanishBeforeT(KGFLRWError):
    """The concavity ODE solution stayed positive up to the target time."""


class ParseError(KGFLRWError):
    """Malformed config or report text. ``line`` is 1-based when known."""

    def __init__(self, msg: str, line: int | None = None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


class UnknownKey(ParseError):
    """Config key is not part of the schema."""


class InvariantViolation(KGFLRWError):
    """A module-level invariant failed. ``module`` names the offender."""

    def __init__(self, module: str, msg: str):
        super().__init__(f"{module}: {msg}")
        self.module = module
