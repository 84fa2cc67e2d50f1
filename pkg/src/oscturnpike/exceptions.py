"""Error types shared across the package."""


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


class NumericsError(RuntimeError):
    """An iterative numerical procedure failed (non-convergence, lost localization, ...)."""
