"""Exception types shared across the package."""


class TodaError(Exception):
    """Base class; ``exit_code`` is what the command line returns."""
    exit_code = 2


class NearZeroOnCircle(TodaError):
    pass


class OutOfDomain(TodaError):
    pass


class InvalidPoint(TodaError):
    pass


class DegenerateLeadingCoefficient(TodaError):
    pass


class NotInM1(TodaError):
    pass


class NotInM0(TodaError):
    pass


class FactorizationResidualTooLarge(TodaError):
    exit_code = 1


class ZetaOutOfDisc(TodaError):
    pass


class WindowTooSmall(TodaError):
    exit_code = 1


class LeftManifold(TodaError):
    pass


class TailBlowup(TodaError):
    pass


class ParseError(TodaError):
    exit_code = 3


class IoError(TodaError):
    exit_code = 3
