"""Exception types raised across the package."""


class DegenerateChainError(ValueError):
    """Two-state chain has no unique stationary distribution."""


class ImpossibleEvidenceError(ValueError):
    """A sensing posterior is indeterminate (zero-probability evidence)."""


class NoFiniteRootError(ValueError):
    """No finite access period satisfies the interference target."""


class InfeasibleError(ValueError):
    """No positive-period point satisfies the interference constraints."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""
