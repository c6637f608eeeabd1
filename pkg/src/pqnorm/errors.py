"""Shared exception types."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class AccuracyError(RuntimeError):
    """A numerical routine could not meet its accuracy target.

    Carries the best value obtained so far in ``achieved`` and, when
    available, an estimate of the error in ``error_estimate``.
    """

    def __init__(self, message, achieved=None, error_estimate=None):
        super().__init__(message)
        self.achieved = achieved
        self.error_estimate = error_estimate


class CertificationError(RuntimeError):
    """A certified bound could not be established at the requested tolerance.

    ``uncertified`` holds the uncertified numerical value.
    """

    def __init__(self, message, uncertified=None):
        super().__init__(message)
        self.uncertified = uncertified


class NumericalError(RuntimeError):
    """An iterative solver produced non-finite iterates.

    ``dump`` carries the offending iterates for post-mortem inspection.
    """

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump
