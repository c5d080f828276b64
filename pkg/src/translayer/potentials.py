"""Double-well potentials and structural hypothesis checks.

A well object bundles the two zeros, an evaluation callable and its
derivative. The derivative is required up front: every minimization in the
package is gradient-based, and a kinked potential should be caught here by
:func:`check_hypotheses` rather than deep inside a line search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["DoubleWell", "quartic_well", "HypothesisReport", "check_hypotheses"]


@dataclass(frozen=True)
class DoubleWell:
    """Nonnegative potential vanishing exactly at the two wells."""

    lo: float
    hi: float
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    deriv_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"wells must be ordered, got ({self.lo}, {self.hi})")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def eval(self, t: np.ndarray | float) -> np.ndarray | float:
        return self.fn(np.asarray(t, dtype=np.float64))

    def deriv(self, t: np.ndarray | float) -> np.ndarray | float:
        return self.deriv_fn(np.asarray(t, dtype=np.float64))

    @property
    def wells(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def gap(self) -> float:
        return self.hi - self.lo


def quartic_well(lo: float, hi: float, scale: float = 1.0) -> DoubleWell:
    """The canonical quartic scale*(t-lo)^2*(t-hi)^2."""

    def fn(t: np.ndarray) -> np.ndarray:
        return scale * (t - lo) ** 2 * (t - hi) ** 2

    def deriv_fn(t: np.ndarray) -> np.ndarray:
        return 2.0 * scale * (t - lo) * (t - hi) * (2.0 * t - lo - hi)

    return DoubleWell(lo, hi, fn, deriv_fn, scale)


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the sampled structural checks on a well.

    The constants are searched, not assumed: ``growth_constant`` is the
    largest C for which W(z) >= C z^2 - 1/C held on the far samples, and
    ``local_constant`` the smallest C with W(z) >= min(|z-lo|, |z-hi|)^2 / C
    within ``local_radius`` of each well.
    """

    zeros_at_wells: bool
    positive_away: bool
    growth_ok: bool
    growth_constant: float
    local_ok: bool
    local_constant: float
    local_radius: float
    derivative_consistent: bool
    derivative_worst: float
    witnesses: dict

    @property
    def all_ok(self) -> bool:
        return (
            self.zeros_at_wells
            and self.positive_away
            and self.growth_ok
            and self.local_ok
            and self.derivative_consistent
        )


def check_hypotheses(
    w: DoubleWell,
    n_samples: int = 1000,
    seed: int = 0,
    deriv_step: float = 1e-5,
    deriv_rtol: float = 1e-6,
) -> HypothesisReport:
    """Probe a well on a deterministic + seeded sample set.

    Checks, in order: zeros exactly at the wells, strict positivity away from
    them, quadratic growth on a wide window, a local quadratic lower bound
    near each well, and consistency of ``deriv`` with centered differences of
    ``eval``.
    """
    rng = np.random.default_rng(seed)
    span = max(w.gap, 1.0)
    wide = np.concatenate(
        [
            np.linspace(w.lo - 10 * span, w.hi + 10 * span, 4001),
            rng.uniform(w.lo - 10 * span, w.hi + 10 * span, n_samples),
        ]
    )
    vals = np.asarray(w.eval(wide))
    witnesses: dict = {}

    zero_lo = float(w.eval(w.lo))
    zero_hi = float(w.eval(w.hi))
    zeros_at_wells = abs(zero_lo) <= 1e-12 and abs(zero_hi) <= 1e-12
    witnesses["well_values"] = (zero_lo, zero_hi)

    # positivity away from the wells (exclude a tiny collar around each zero)
    collar = 1e-6 * span
    away = (np.abs(wide - w.lo) > collar) & (np.abs(wide - w.hi) > collar)
    positive_away = bool(np.all(vals[away] > 0))
    if not positive_away:
        bad = wide[away][vals[away] <= 0]
        witnesses["nonpositive_at"] = float(bad[0])

    # growth: largest C on a log grid with W >= C z^2 - 1/C everywhere sampled
    growth_constant = 0.0
    for cand in np.logspace(-8, 4, 121):
        if np.all(vals >= cand * wide**2 - 1.0 / cand - 1e-12):
            growth_constant = float(cand)
    growth_ok = growth_constant > 0.0

    # local quadratic bound within radius rho of each well
    rho = 0.25 * w.gap
    local_constant = 0.0
    local_ok = True
    for well in w.wells:
        z = well + rho * np.concatenate([rng.uniform(-1, 1, 400), np.linspace(-1, 1, 401)])
        z = z[np.abs(z - well) > 1e-9 * span]
        Wz = np.asarray(w.eval(z))
        dist2 = np.minimum(np.abs(z - w.lo), np.abs(z - w.hi)) ** 2
        if np.any(Wz <= 0):
            local_ok = False
            continue
        local_constant = max(local_constant, float(np.max(dist2 / Wz)))
    local_ok = local_ok and np.isfinite(local_constant) and local_constant > 0

    # derivative consistency by centered differences; probes straddling each
    # well catch kinks there (random points alone essentially never would)
    near = np.concatenate(
        [well + off for well in w.wells for off in (deriv_step * np.array([-0.3, 0.1, 0.45]),)]
    )
    pts = np.concatenate([rng.uniform(w.lo - 2 * span, w.hi + 2 * span, n_samples), near])
    d_exact = np.asarray(w.deriv(pts))
    d_fd = (np.asarray(w.eval(pts + deriv_step)) - np.asarray(w.eval(pts - deriv_step))) / (
        2 * deriv_step
    )
    scale_ref = np.maximum(np.abs(d_exact), np.max(np.abs(d_exact)) * 1e-3 + 1e-12)
    rel = np.abs(d_fd - d_exact) / scale_ref
    derivative_worst = float(np.max(rel))
    derivative_consistent = derivative_worst <= deriv_rtol
    if not derivative_consistent:
        witnesses["derivative_worst_at"] = float(pts[np.argmax(rel)])

    return HypothesisReport(
        zeros_at_wells=zeros_at_wells,
        positive_away=positive_away,
        growth_ok=growth_ok,
        growth_constant=growth_constant,
        local_ok=local_ok,
        local_constant=local_constant,
        local_radius=rho,
        derivative_consistent=derivative_consistent,
        derivative_worst=derivative_worst,
        witnesses=witnesses,
    )
