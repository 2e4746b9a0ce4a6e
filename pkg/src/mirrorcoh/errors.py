"""Exception hierarchy shared by all modules."""


class MirrorCohError(Exception):
    """Base class for every error raised by the package."""


class DomainError(MirrorCohError, ValueError):
    """An argument lies outside the domain of the operation (e.g. non-finite)."""


class UsageError(MirrorCohError, ValueError):
    """An operation was called with an unsupported option."""


class PreconditionError(MirrorCohError, ValueError):
    """A physical parameter violates a stated precondition (e.g. Omega <= 0)."""


class UnsupportedError(MirrorCohError):
    """The requested quantity does not exist for this trajectory."""


class SingularityError(MirrorCohError, ArithmeticError):
    """A Wightman-function denominator vanished.

    Attributes
    ----------
    term : str
        Name of the offending term.
    """

    def __init__(self, term, modulus):
        self.term = term
        self.modulus = modulus
        super().__init__(f"singular {term} term (denominator modulus {modulus:.3g})")


class ConvergenceError(MirrorCohError, ArithmeticError):
    """Quadrature did not converge under node doubling."""

    def __init__(self, quantity, coarse, fine):
        self.quantity = quantity
        self.coarse = coarse
        self.fine = fine
        super().__init__(
            f"{quantity} changed from {complex(coarse):.6g} to {complex(fine):.6g} when doubling nodes"
        )


class ConsistencyError(MirrorCohError, ArithmeticError):
    """An internal invariant (positivity, reality, closed-form match) failed."""


class DegenerateError(MirrorCohError, ArithmeticError):
    """A ratio is undefined because E_A * E_B vanishes."""


class PerturbativeRegimeError(MirrorCohError, ValueError):
    """Second-order truncation produced a negative ground-state population."""


class ConfigError(MirrorCohError, ValueError):
    """A configuration file could not be parsed or validated."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
