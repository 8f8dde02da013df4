"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration and constraint
problems exit 2, data/support problems exit 3, corrupt artifacts exit 4.
"""

__all__ = [
    "DomainError",
    "StructuralError",
    "ConstraintError",
    "InfeasibleWeightsError",
    "CapabilityError",
    "SupportError",
    "ConfigError",
    "CorruptArtifactError",
]


class DomainError(ValueError):
    """Mathematically invalid input (precondition violation)."""


class StructuralError(ValueError):
    """Shape, dimension, or degree mismatch between components."""


class ConstraintError(ValueError):
    """Coefficients violate the defining constraint set of their type."""


class InfeasibleWeightsError(ConstraintError):
    """Interior weights admit no valid vertex completion.

    Attributes
    ----------
    vertex_mass : tuple of float
        The offending completed values.
    """

    def __init__(self, message: str, vertex_mass=()):
        super().__init__(message)
        self.vertex_mass = tuple(vertex_mass)


class CapabilityError(ValueError):
    """Request exceeds the supported problem size (e.g. dimension cap)."""


class SupportError(DomainError):
    """Data outside the support of the margin family.

    Attributes
    ----------
    row, coordinate : int or None
        First offending position when known.
    """

    def __init__(self, message: str, row=None, coordinate=None):
        super().__init__(message)
        self.row = row
        self.coordinate = coordinate


class ConfigError(ValueError):
    """Invalid run configuration."""


class CorruptArtifactError(ValueError):
    """Persisted artifact cannot be parsed.

    Attributes
    ----------
    line : int or None
        1-based line number of the defect when applicable.
    """

    def __init__(self, message: str, line=None):
        super().__init__(message)
        self.line = line
