"""Exception hierarchy shared by all modules."""


class NcsError(Exception):
    """Base class for every error raised by this package."""


class StructureError(NcsError, ValueError):
    """Malformed input: wrong shapes, bad indices, non-numeric data."""


class PartitionError(NcsError, ValueError):
    """A partition violates one or more of the admissibility conditions C1-C4."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MissingGainError(NcsError, ValueError):
    """An operation needed a feedback gain that the plant does not carry."""


class NotPositiveDefiniteError(NcsError, ValueError):
    def __init__(self, name, min_eig):
        super().__init__(f"{name} is not positive definite (smallest eigenvalue {min_eig:.6g})")
        self.name = name
        self.min_eig = min_eig


class NumericalError(NcsError, ArithmeticError):
    """A dense linear-algebra routine failed; the offending matrix is attached."""

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class InfeasibleError(NcsError):
    """A matrix inequality has no solution under the chosen instantiation."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class SynthesisError(NcsError):
    """No candidate gain passed the stochastic-stability gate."""

    def __init__(self, message, best_radius=None, best=None):
        super().__init__(message)
        self.best_radius = best_radius
        self.best = best


class PlantError(NcsError):
    """Wraps a per-plant failure with the 1-based plant index."""

    def __init__(self, plant, cause):
        super().__init__(f"plant {plant}: {cause}")
        self.plant = plant
        self.cause = cause


class ConfigError(NcsError, ValueError):
    """Configuration file failed to parse; ``path`` is the JSON path of the fault."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
