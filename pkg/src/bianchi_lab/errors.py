"""Exception hierarchy shared by all modules.

Each class carries the process exit status the command-line front end maps it to.
"""


class BianchiLabError(Exception):
    exit_status = 1


class DomainError(BianchiLabError, ValueError):
    """A metric coefficient (or other strictly positive input) is not positive."""

    exit_status = 2

    def __init__(self, field, value):
        super().__init__(f"{field} must be strictly positive, got {value!r}")
        self.field = field
        self.value = value


class ParameterError(BianchiLabError, ValueError):
    exit_status = 2


class ConfigError(BianchiLabError, ValueError):
    exit_status = 2


class IntegrationError(BianchiLabError, RuntimeError):
    exit_status = 3


class IntegrationDiverged(IntegrationError):
    def __init__(self, message, last_good_time):
        super().__init__(f"{message} (last good time {last_good_time:.17g})")
        self.last_good_time = last_good_time


class ConservationError(IntegrationError):
    def __init__(self, drift, ceiling, worst_time):
        super().__init__(
            f"volume drift {drift:.3e} exceeds ceiling {ceiling:.3e} at t={worst_time:.6g}"
        )
        self.drift = drift
        self.ceiling = ceiling
        self.worst_time = worst_time


class QuadratureError(IntegrationError):
    pass


class NotAvailableError(BianchiLabError, NotImplementedError):
    exit_status = 2


class ClassMismatchError(BianchiLabError, ValueError):
    exit_status = 2


class PreconditionError(BianchiLabError, ValueError):
    exit_status = 1


class TimeRangeError(BianchiLabError, ValueError):
    exit_status = 2


class PolicyError(BianchiLabError, ValueError):
    exit_status = 2


class NoTauError(BianchiLabError):
    """No grid suffix exists on which every ordering predicate holds."""

    exit_status = 1

    def __init__(self, message, longest_suffix_start=None):
        super().__init__(message)
        self.longest_suffix_start = longest_suffix_start


class DegenerateInputError(BianchiLabError, ValueError):
    exit_status = 2
