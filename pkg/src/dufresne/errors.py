"""Exception hierarchy shared by all modules."""


class DufresneError(Exception):
    """Base class for library errors."""


class DomainError(DufresneError, ValueError):
    """Argument outside the supported domain of an operation."""


class PoleError(DomainError):
    """Evaluation at a pole of the gamma function."""


class ParameterError(DufresneError, ValueError):
    """Invalid parameter list (pole in a denominator, unpaired complex entry, ...)."""


class ConvergenceError(DufresneError, ArithmeticError):
    """A series or iteration hit its term/iteration cap."""


class NotSamplableError(DufresneError):
    """The law has no beta/gamma product representation."""


class SolverDisagreementError(DufresneError, ArithmeticError):
    """Two independent root finders disagree beyond tolerance."""


class UnsupportedError(DufresneError, NotImplementedError):
    """No closed form or supported evaluation path for these inputs."""


class InsufficientSampleError(DufresneError, ValueError):
    """Too few samples for a reliable comparison."""


class InvalidPairingError(NotSamplableError):
    """Real parameters, but no numerator/denominator pairing with c - a >= 0."""
