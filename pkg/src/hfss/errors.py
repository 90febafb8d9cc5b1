"""Exception hierarchy and the process exit codes the CLI maps it to."""


class HfssError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(HfssError):
    """Bad configuration or misuse of an interface, detected before compute."""

    exit_code = 2


class InvalidResolutionError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class MeshMismatchError(ValidationError):
    pass


class InvalidTestFieldError(ValidationError):
    pass


class ConcatenationError(ValidationError):
    pass


class StorageError(ValidationError):
    """A snapshot was requested at a time index that was not stored."""


class NumericalError(HfssError):
    """A computation started but failed a runtime numerical guard."""

    exit_code = 3


class MeshConsistencyError(NumericalError):
    pass


class ConstraintViolationError(NumericalError):
    """A field violated the pointwise unit-norm constraint."""


class StepSizeError(NumericalError):
    """Renormalization became ill-posed; the time step is too large."""


class InstabilityError(NumericalError):
    pass


class NotWeaklyHarmonicError(NumericalError):
    """Datum failed the weak-harmonicity gate for a constant-in-time trajectory."""


class EmptySolutionSetError(NumericalError):
    """No candidate trajectory passed admissibility; tolerances are misconfigured."""


class ArchiveError(HfssError):
    """Archive on disk is missing, corrupt, or inconsistent with its manifest."""

    exit_code = 4
