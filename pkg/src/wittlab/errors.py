"""Exception types shared across the library.

Every failure mode that callers are expected to handle gets its own class;
anything else is a plain bug and surfaces as AssertionError/ValueError.
"""


class WittlabError(Exception):
    """Base class for all library errors."""


class IntegralityFailure(WittlabError):
    """A coefficient that must be an integer is not (construction bug)."""


class CongruenceFailure(WittlabError):
    """Ghost inversion input violates sigma(u_{n-1}) = u_n mod p^n."""


class PrecisionExhausted(WittlabError):
    """Not enough guard digits to carry out the requested divisions."""


class NonEisenstein(WittlabError):
    """The ramified modulus failed the Eisenstein criterion."""


class NotDivisible(WittlabError):
    """Exact division by a power of p is impossible at working precision."""


class MissingAssignment(WittlabError):
    """Polynomial evaluation is missing a value for some indeterminate."""


class RingMismatch(WittlabError):
    """Operands live in different rings (or incompatible lengths)."""


class TooShort(WittlabError):
    """Witt vector too short for the requested operation."""


class NotGaloisStable(WittlabError):
    """A Witt trace produced components not fixed under x -> x^q."""


class PrecisionNotReached(WittlabError):
    """A truncated series ran out of terms before the target precision."""


class NonIntegralResult(WittlabError):
    """A rational-lift computation produced non p-integral coefficients."""


class TailNotCertified(WittlabError):
    """Coefficient valuations do not certify the series tail at the target."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SnapAmbiguous(WittlabError):
    """Two roots of unity are equally close: precision is too low."""


class SeedNotConverging(WittlabError):
    """Root-of-unity lifting failed (wrong ring level or precision too low)."""


class NotUnit(WittlabError):
    """Element expected to be invertible is not."""


class TruncationTooSmall(WittlabError):
    """The requested construction does not fit in the truncation degree."""


class NoConventionMatches(WittlabError):
    """Neither Gauss-sum summation convention matches the operator trace."""


class ReportedMismatch(WittlabError):
    """An exhaustive verification found an offending vector."""


class TimeBudgetExceeded(WittlabError):
    """A cooperative deadline ran out inside a long computation."""
