"""Exception hierarchy shared by every fieldprobe module."""


class FieldProbeError(Exception):
    """Base class for numerical and domain failures raised by fieldprobe."""


class NonPositiveDefinite(FieldProbeError, ValueError):
    """A covariance matrix has an eigenvalue at or below the positivity floor."""


class ConvergenceFailure(FieldProbeError, ArithmeticError):
    """The skew-symmetric block reduction did not produce a clean 2x2 block form."""


class IndexOutOfRange(FieldProbeError, IndexError):
    pass


class DomainError(FieldProbeError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class UnstableHamiltonian(FieldProbeError, ValueError):
    """The lattice potential is not positive definite (or the mass is zero)."""


class LengthMismatch(FieldProbeError, ValueError):
    pass


class DimensionMismatch(FieldProbeError, ValueError):
    pass


class NotPure(FieldProbeError, ValueError):
    """The global state is required to be pure but has symplectic eigenvalues above 1."""


class DegeneratePairing(FieldProbeError, ValueError):
    """Partner pairing by rank is ambiguous (degenerate or unentangled mode)."""


class NonCommutingModes(FieldProbeError, ValueError):
    """Assigned collective modes violate canonical commutation relations."""


class IncompleteBasis(FieldProbeError, ArithmeticError):
    """Symplectic completion of a partial mode basis failed."""


class QuadratureFailure(FieldProbeError, ArithmeticError):
    """Two quadrature orders disagree beyond tolerance."""


class ConfigError(FieldProbeError, ValueError):
    """An experiment configuration is missing a field or has an invalid value.

    ``path`` names the offending field as ``section.key``.
    """

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
