"""Exception types raised by the pricing library."""


class PricingError(Exception):
    """Base class for all library errors."""


class DomainError(PricingError, ValueError):
    """An input lies outside the admissible domain of an operation."""


class DegenerateInputError(DomainError):
    """Inputs are formally valid but describe a degenerate configuration.

    Raised, for example, when both firms start exactly on their barriers.
    """


class ConvergenceError(PricingError, ArithmeticError):
    """A series or quadrature did not reach its tolerance within its cap."""


class NonFiniteIntegrandError(PricingError, FloatingPointError):
    """An integrand returned NaN or infinity at a quadrature node."""
