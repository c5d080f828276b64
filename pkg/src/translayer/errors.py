"""Exception types shared across the package."""

from __future__ import annotations


class TranslayerError(Exception):
    """Base class for package-specific failures."""


class NonFiniteEnergyError(TranslayerError):
    """An energy or gradient evaluation produced NaN/inf during descent."""

    def __init__(self, iteration: int, detail: str = ""):
        self.iteration = iteration
        msg = f"non-finite energy at iteration {iteration}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DegenerateTraceError(TranslayerError):
    """Trace input has (numerically) zero derivative seminorm; ratios undefined."""


class SolveConvergenceError(TranslayerError):
    """Sparse solve failed to reach the requested residual within the cap."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"linear solve stalled at relative residual {residual:.3e} "
            f"after {iterations} refinement steps"
        )


class ConfigError(TranslayerError):
    """Invalid run configuration (bad key, duplicate key, malformed value)."""
