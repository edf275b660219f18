"""Exception hierarchy shared by all modules."""


class QchanError(Exception):
    """Base class for library errors."""


class DimMismatch(QchanError, ValueError):
    pass


class NonHermitian(QchanError, ValueError):
    pass


class NotPSD(QchanError, ValueError):
    pass


class BadParam(QchanError, ValueError):
    pass


class NotQubit(QchanError, ValueError):
    pass


class BadBloch(QchanError, ValueError):
    pass


class DomainError(QchanError, ValueError):
    pass


class SupportViolation(QchanError, ValueError):
    pass


class AssumptionFailed(QchanError):
    """A hypothesis of a bound does not hold; ``failures`` names each one."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class PurityPreserving(QchanError):
    """Channel maps every pure state to a pure state."""


class NotStrictlyPositive(QchanError, ValueError):
    pass


class BadEnsemble(QchanError, ValueError):
    pass


class ParseError(QchanError, ValueError):
    pass
