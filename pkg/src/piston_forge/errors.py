"""Exception and warning types raised across the package."""


class PistonForgeError(Exception):
    """Base class for all package errors."""


class DomainError(PistonForgeError, ValueError):
    """An argument lies outside the domain of the operation."""


class QuadratureError(PistonForgeError, RuntimeError):
    """Adaptive quadrature failed to meet its tolerance."""


class NormDriftError(PistonForgeError, RuntimeError):
    """The eigenbasis integrator lost norm beyond tolerance."""


class SpectralError(PistonForgeError, ValueError):
    """A singular value exceeds one: the matrix cannot be a contraction."""


class NonUnitaryError(PistonForgeError, ValueError):
    def __init__(self, message, epsilon_pct=None):
        super().__init__(message)
        self.epsilon_pct = epsilon_pct


class GeometryError(PistonForgeError, ValueError):
    """A submesh cannot be placed in the rectangular layout."""


class PhotonNumberError(PistonForgeError, ValueError):
    """Input and output Fock states carry different photon numbers."""


class NormalizationError(PistonForgeError, ValueError):
    """A probability distribution does not sum to one."""


class CoverageError(PistonForgeError, ValueError):
    """A conditional distribution is missing for a required input state."""


class BasisMismatchError(PistonForgeError, ValueError):
    """Two distributions are defined on different Fock bases."""


class ConfigError(PistonForgeError, ValueError):
    """An experiment configuration is malformed."""


class CutoffWarning(UserWarning):
    """The solution-set cutoff may be too small for the requested accuracy."""
