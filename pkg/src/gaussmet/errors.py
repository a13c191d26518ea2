"""Exception types raised by the gaussmet toolkit."""


class GaussmetError(Exception):
    """Base class for all gaussmet errors."""


class DimensionMismatch(GaussmetError):
    """Array shapes are inconsistent with the declared number of modes."""


class NotPositiveDefinite(GaussmetError):
    """A covariance matrix is not symmetric positive-definite."""


class UncertaintyViolated(GaussmetError):
    """A symplectic eigenvalue lies below the vacuum limit 1/2."""


class DecompositionFailed(GaussmetError):
    """A matrix decomposition did not converge or failed validation."""


class NotSymplectic(GaussmetError):
    """A matrix does not preserve the symplectic form."""


class NotSymplecticOrthogonal(GaussmetError):
    """A matrix is not both orthogonal and symplectic."""


class SingularMixture(GaussmetError):
    """The mixing covariance is singular; the convex weight density does not exist."""


class InfeasibleTarget(GaussmetError):
    """The requested random-state parameters are mutually incompatible."""


class CircuitSyntaxError(GaussmetError):
    """A circuit file does not conform to the grammar.

    Attributes:
        line: 1-based line number of the offending statement.
        col: 1-based column number where parsing failed.
    """

    def __init__(self, message, line, col=1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class ModeOutOfRange(GaussmetError):
    """A circuit element addresses a mode index outside 1..M."""


class NoParameter(GaussmetError):
    """The circuit never references the estimation parameter."""


class NotUnitary(GaussmetError):
    """A matrix expected to be unitary is not."""


class NotHermitian(GaussmetError):
    """A matrix expected to be Hermitian is not."""


class NotPure(GaussmetError):
    """An operation restricted to pure states received a mixed state."""


class SingularBeyondPureTol(GaussmetError):
    """The least-squares solution of the quadrature SLD equation left a large residual."""


class PrecondViolated(GaussmetError):
    """An input violates the positivity/Hermiticity requirements of a matrix lemma."""


class NonIdentifiable(GaussmetError):
    """The homodyne variance is stationary in the parameter; the MLE is undefined."""


class IoError(GaussmetError):
    """A report file could not be written."""
