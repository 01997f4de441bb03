"""Exception types shared across the package.

The CLI maps these onto its exit codes: validation problems (bad files,
bad dimensions, bad syntax) exit with 2, numerical failures (integration,
quadrature, domain errors during evaluation) exit with 3.
"""


class CharbvpError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CharbvpError):
    """Malformed input data: bad dimensions, bad schema, bad field values."""


class ExprSyntaxError(ValidationError):
    """Expression source failed to parse; carries a 0-based character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    """Expression used an identifier that is not part of the grammar."""


class NumericalError(CharbvpError):
    """A numerical computation failed or produced non-finite values."""


class DomainEvalError(NumericalError):
    """Expression evaluation hit a pole or branch problem (1/0, log 0, ...)."""


class DerivativeOrderError(NumericalError):
    """A derivative order beyond what the function supports was requested."""


class IntegrationError(NumericalError):
    """The ODE integrator failed or exhausted its step budget."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to produce a finite result."""
