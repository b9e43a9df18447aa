"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(DomainError):
    """A dense subset representation would be too large (s > 16)."""


class PreconditionError(DomainError):
    """A modelling hypothesis does not hold for the given input."""


class FastPathUnsupported(DomainError):
    """The FFT construction needs a prime modulus."""


class InfeasibleError(RuntimeError):
    """The candidate sets of a construction step have empty intersection."""

    def __init__(self, dimension, message=None):
        self.dimension = dimension
        super().__init__(message or f"empty candidate intersection at dimension {dimension}")


class ConsistencyError(ArithmeticError):
    """A computed quantity violates a mathematical invariant beyond rounding."""
