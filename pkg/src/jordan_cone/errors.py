"""Exception hierarchy."""


class JordanConeError(Exception):
    """Base class for every error raised by this package."""


class InvalidDescriptor(JordanConeError, ValueError):
    pass


class InvalidElement(JordanConeError, ValueError):
    pass


class AlgebraMismatch(JordanConeError, ValueError):
    """Operands live in different algebras."""


class DomainError(JordanConeError, ValueError):
    """An eigenvalue lies outside the domain of the applied function."""


class BoundaryError(JordanConeError, ValueError):
    """An element expected in the open cone is on (or outside) its boundary."""


class NonPositive(JordanConeError, ValueError):
    """An element has non-positive trace and spans no ray."""


class NotPositive(JordanConeError, ValueError):
    """A functional expected to be positive is not."""


class NotInHyperplane(JordanConeError, ValueError):
    """A functional does not annihilate the unit."""


class InvalidFace(JordanConeError, ValueError):
    pass


class NotAnIsometry(JordanConeError, ValueError):
    pass


class FactorizationFailed(JordanConeError, RuntimeError):
    pass


class EvaluationBudgetExceeded(FactorizationFailed):
    pass


class VerificationError(JordanConeError, RuntimeError):
    """Two routes that must agree (structural flag vs sampled check) did not."""


class UnknownSuite(JordanConeError, KeyError):
    pass
