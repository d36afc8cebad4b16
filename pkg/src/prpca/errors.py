"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operands have inconsistent dimensions."""


class InsufficientDataError(ValueError):
    """Too few correspondences to fit a model."""


class InsufficientFeaturesError(ValueError):
    """Too few feature matches between a frame pair."""


class DegenerateGeometryError(ValueError):
    """Point configuration does not determine a valid homography."""


class RegistrationError(RuntimeError):
    """Robust fitting failed to find a consensus set."""


class CanvasBudgetError(ValueError):
    """Panoramic canvas would exceed the configured pixel budget."""


class RankError(ValueError):
    """Requested rank is incompatible with the matrix dimensions."""


class DivergenceError(RuntimeError):
    """Solver iterates became non-finite."""


class IngestionError(ValueError):
    """Input files could not be loaded into frames."""


class UndefinedMetricError(ValueError):
    """Metric is undefined for the given inputs (e.g. empty mask region)."""


class ConfigError(ValueError):
    """Invalid configuration values."""
