"""Exception types raised across the package."""


class FuzzySphereError(Exception):
    """Base class for all package errors."""


class NonGroup(FuzzySphereError):
    """A finite set of matrices fails closure, identity, inverses or associativity."""


class BadLength(FuzzySphereError):
    """A length table violates one of the length-function axioms.

    ``witness`` holds the offending tuple of element indices.
    """

    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


class DegenerateBasis(FuzzySphereError):
    """Ladder descent produced a vanishing pivot."""


class BandLimitExceeded(FuzzySphereError):
    """A function carries harmonic content above the admissible degree."""


class NotADerivation(FuzzySphereError):
    """A linear map fails the sampled Leibniz identity."""


class DomainMismatch(FuzzySphereError):
    """Seminorms combined over different algebras."""


class NonMonotoneNorm(FuzzySphereError):
    """An outer norm on R^k is not monotone on the positive orthant."""


class NotAMetric(FuzzySphereError):
    """A distance table violates the metric axioms."""


class DimensionTooLarge(FuzzySphereError):
    """Brute-force search requested in too many dimensions."""


class BoundViolation(FuzzySphereError):
    """A numerically estimated distance exceeds a proven bound."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(FuzzySphereError):
    """Invalid command-line or file configuration."""
