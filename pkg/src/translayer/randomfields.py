"""Seeded generators of smooth random profiles for the property suites.

All randomness in the package flows through :class:`numpy.random.Generator`
instances created by the caller, so fixing a seed fixes every suite.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid1D, ScalarField1D


def smooth_profile(
    grid: Grid1D,
    rng: np.random.Generator,
    *,
    modes: int = 8,
    nonneg: bool = False,
    zero_at_origin: bool = False,
) -> ScalarField1D:
    """Random smooth field: a decaying sine series plus a low-degree polynomial.

    Mode ``k`` enters with amplitude ``~1/k^2`` and a random phase, so the
    result is smooth at every grid size while staying genuinely curved (the
    polynomial part alone would be too tame for seminorm exercises). The field
    is normalized to unit max-norm. ``nonneg`` shifts the minimum to zero;
    ``zero_at_origin`` additionally tapers by the normalized coordinate so the
    value at the left end vanishes.
    """

    if modes < 1:
        raise ValueError(f"need at least one mode, got {modes}")
    t = (grid.nodes - grid.lo) / (grid.hi - grid.lo)
    vals = np.zeros_like(t)
    for k in range(1, modes + 1):
        amp = rng.normal() / k**2
        phase = rng.uniform(0.0, 2.0 * np.pi)
        vals += amp * np.sin(np.pi * k * t + phase)
    c0, c1, c2 = rng.normal(size=3)
    vals += 0.3 * (c0 + c1 * t + c2 * t * t)
    if nonneg:
        vals -= vals.min()
    if zero_at_origin:
        vals *= t
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals /= peak
    return ScalarField1D(grid, vals)


def transition_profile(
    grid: Grid1D,
    rng: np.random.Generator,
    lo_val: float,
    hi_val: float,
    *,
    wobble: float = 0.1,
) -> ScalarField1D:
    """Random monotone-ish transition from ``lo_val`` to ``hi_val``.

    A sigmoid of random center and width plus a small smooth perturbation that
    vanishes at the ends; useful as a near-admissible profile for extension
    and energy-inflation checks.
    """

    span = grid.hi - grid.lo
    center = grid.lo + span * rng.uniform(0.35, 0.65)
    width = span * rng.uniform(0.05, 0.15)
    base = 0.5 * (lo_val + hi_val) + 0.5 * (hi_val - lo_val) * np.tanh(
        (grid.nodes - center) / width
    )
    t = (grid.nodes - grid.lo) / span
    bump = np.sin(np.pi * t) ** 2 * rng.normal() * wobble
    return ScalarField1D(grid, base + bump)
