"""Exception types shared across the package."""


class SpringSticksError(Exception):
    """Base class for package-specific failures."""


class DomainError(SpringSticksError, ValueError):
    """An input point lies outside the rectangle covered by the lattice."""


class IntegrationBlowupError(SpringSticksError, ArithmeticError):
    """Integration produced non-finite values; retry with a smaller time step."""


class SingularDiffusionError(SpringSticksError, ValueError):
    """Entropy rates need an invertible velocity diffusion block (T > 0, gamma > 0)."""


class EstimatorUndefinedError(SpringSticksError, ValueError):
    """The requested estimator is undefined for these parameters (e.g. T = 0)."""


class ConfigError(SpringSticksError, ValueError):
    """Experiment configuration is missing or invalid; message names the field path."""
