"""Exception and warning types used across the toolkit."""


class DiscordMergeError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(DiscordMergeError):
    """Input failed one of the documented invariants (CLI exit code 2)."""


class NotHermitian(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadSubsystemIndex(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotPure(ValidationError):
    pass


class InvalidMeasurement(ValidationError):
    pass


class InvalidPMF(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class StateResultMismatch(ValidationError):
    pass


class CompletionFailure(DiscordMergeError):
    """Orthonormal completion of a dilation isometry fell below full rank."""


class DegenerateUndecided(DiscordMergeError):
    """The structural zero-discord test could not decide: the joint
    diagonalization residual sits between tol and 10*tol.  Callers should
    fall back to the optimization-based discord value."""


class OptimizerDidNotConverge(UserWarning):
    """The measurement optimizer hit its iteration budget while the
    objective was still moving by more than the configured tolerance.
    A result is still returned, flagged as unconverged."""
