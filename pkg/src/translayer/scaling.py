"""Sweep experiments along the critical coupling: bulk transition cost, boundary
transition cost, and the O(1) plate scaling, each minimized from construction
ansatz initializers.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import MatchSide, compute_c_under, compute_m, cubic_match
from .energy import (
    EnergyBreakdown,
    EpsLambda,
    FullEnergy2D,
    TraceEnergy1D,
    WallEnergy1D,
    mask_quadrature,
)
from .errors import NonFiniteEnergyError, TranslayerError
from .grid import Grid1D, Grid2D, GridShape, ScalarField1D, ScalarField2D
from .optimize import Constraint, ConstraintKind, minimize
from .potentials import DoubleWell

log = logging.getLogger(__name__)

MAX_NODES_2D = 192
MIN_EPS_2D = 1.0 / 48.0
LAYER_RESOLUTION = 4.0
_SEAL_FACTOR = 4.0
_WALL_FACTOR = 1.2
_ANSATZ_R = 4.0
_ANSATZ_N = 256
_TRACE_ANSATZ_R = 6.0
_TRACE_ANSATZ_N = 384


class InitKind(Enum):
    LINEAR_INTERP = "linear-interp"
    PROFILE_ANSATZ = "profile-ansatz"
    BOUNDARY_LAYER_ANSATZ = "boundary-layer-ansatz"


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a coupling target, a descending ε ladder, and the setup.

    ``lambda_override`` pins the boundary coupling to a fixed value instead of
    deriving it from ``(eps, L)``; the recorded ``L`` then varies per record
    (the off-critical probe).
    """

    L: float
    eps_list: tuple[float, ...]
    bulk_well: DoubleWell
    trace_well: DoubleWell
    domain: Grid1D | Grid2D
    constraint: tuple[Constraint, ...] = ()
    init: InitKind = InitKind.PROFILE_ANSATZ
    lambda_override: float | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"coupling target L must be positive, got {self.L}")
        eps = tuple(float(e) for e in self.eps_list)
        if len(eps) < 4:
            raise ValueError("plateau detection needs at least 4 sweep values")
        if any(not (np.isfinite(e) and e > 0) for e in eps):
            raise ValueError("every eps must be positive and finite")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        object.__setattr__(self, "eps_list", eps)
        cons = self.constraint
        if cons is None:
            cons = ()
        elif isinstance(cons, Constraint):
            cons = (cons,)
        object.__setattr__(self, "constraint", tuple(cons))
        if not isinstance(self.init, InitKind):
            raise ValueError(f"init must be an InitKind, got {self.init!r}")
        if self.lambda_override is not None and not (
            np.isfinite(self.lambda_override) and self.lambda_override > 0
        ):
            raise ValueError(f"lambda_override must be positive, got {self.lambda_override}")


@dataclass(frozen=True)
class SweepRecord:
    eps: float
    lam: float
    L: float
    min_energy: float
    breakdown: EnergyBreakdown
    converged: bool
    wall_ms: int

    def __post_init__(self) -> None:
        if self.min_energy != self.breakdown.total:
            raise ValueError("min_energy must equal the breakdown total")


def _eps_lambda(cfg: SweepConfig, eps: float) -> EpsLambda:
    if cfg.lambda_override is not None:
        return EpsLambda(eps, cfg.lambda_override)
    return EpsLambda.from_critical(eps, cfg.L)


def profile_ansatz_1d(
    m_profile: ScalarField1D, eps: float, jump_at: float, grid: Grid1D
) -> ScalarField1D:
    """Rescale a transition profile to width ``eps`` around ``jump_at``.

    Inside the ε-scaled copy of the profile window the field is the profile
    itself; beyond it the profile's own end values (the wells) continue
    constantly. The scaled window must fit inside the grid.
    """

    if not (np.isfinite(eps) and eps > 0):
        raise ValueError(f"eps must be positive, got {eps}")
    if not (grid.lo < jump_at < grid.hi):
        raise ValueError(f"jump location {jump_at} must be interior to the grid")
    pg = m_profile.grid
    span = grid.hi - grid.lo
    slack = 1e-12 * span
    if jump_at + eps * pg.lo < grid.lo - slack or jump_at + eps * pg.hi > grid.hi + slack:
        raise ValueError(
            f"scaled window [{jump_at + eps * pg.lo:.4g}, {jump_at + eps * pg.hi:.4g}] "
            f"exceeds the domain [{grid.lo:.4g}, {grid.hi:.4g}]"
        )
    vals = np.interp((grid.nodes - jump_at) / eps, pg.nodes, m_profile.values)
    return ScalarField1D(grid, vals)


def boundary_layer_ansatz_2d(
    c_profile: ScalarField1D, el: EpsLambda, grid: Grid2D
) -> ScalarField2D:
    """Boundary-layer initializer: lifted trace jump under an ε-scale wall.

    The trace profile, rescaled by ``el.rho``, is placed around the bottom-edge
    midpoint and lifted by interval averaging through a strip of height
    ``rho * R``.  The jump continues upward as a vertical wall: a well-to-well
    ramp of width about ε, constant in the normal direction.  A band of
    vertical cubics joins strip and wall with value and slope continuity, so
    the composite field has no gradient kinks along either seam.  Columns far
    enough from the jump (beyond the averaging window and the wall ramp) sit
    exactly at the well constants.
    """

    if grid.shape is not GridShape.RECTANGLE:
        raise ValueError("the boundary-layer ansatz is defined on rectangles")
    pg = c_profile.grid
    rt = 0.5 * (pg.hi - pg.lo)
    rho = el.rho
    width = grid.nx * grid.hx
    height = grid.ny * grid.hy
    if rho * rt > 0.5 * width or rho * rt > 0.5 * height:
        raise ValueError(
            f"scaled layer half-width {rho * rt:.4g} exceeds half the domain "
            f"({width:.4g} x {height:.4g})"
        )

    pv = c_profile.values
    alpha = float(pv[0])
    beta = float(pv[-1])
    shift = pg.lo + rt  # profile window midpoint, usually 0
    xc = grid.x0 + 0.5 * width

    # antiderivative of the constant-extended trace, in profile coordinates
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (pv[1:] + pv[:-1]) * pg.h)])

    def trace(q: np.ndarray) -> np.ndarray:
        return np.interp(q, pg.nodes, pv)

    def anti(q: np.ndarray) -> np.ndarray:
        core = np.interp(np.clip(q, pg.lo, pg.hi), pg.nodes, cum)
        return (
            core
            + alpha * np.minimum(q - pg.lo, 0.0)
            + beta * np.maximum(q - pg.hi, 0.0)
        )

    xs = grid.xs
    ys = grid.ys
    s = (xs - xc) / rho + shift
    y_lift = rho * rt

    # seam value and vertical slope at the top of the lifting strip
    u_cap = (anti(s + rt) - anti(s - rt)) / (2.0 * rt)
    z_cap = (trace(s + rt) + trace(s - rt) - 2.0 * u_cap) / (2.0 * rt * rho)

    # the wall the strip is matched onto: the trace profile re-used as a
    # well-to-well ramp in x at scale ~ε (it hugs the wells, so it is a far
    # cheaper bulk wall than a bare cubic ramp, and its pinned ends make the
    # far columns exactly constant); a spline rather than linear interpolation
    # because the wall's second differences feed straight into the bending term
    mu = min(_WALL_FACTOR * el.eps, 0.25 * width)
    s_wall = (xs - xc) / mu + shift
    smooth = CubicSpline(pg.nodes, pv, bc_type="natural")
    wall = smooth(np.clip(s_wall, pg.lo, pg.hi))
    wall[s_wall <= pg.lo] = alpha
    wall[s_wall >= pg.hi] = beta

    seal = min(_SEAL_FACTOR * el.eps, height - y_lift)
    seal = max(seal, min(2.0 * grid.hy, height - y_lift))

    tiny = 1e-12 * max(height, 1.0)
    vals = np.empty((grid.ny + 1, grid.nx + 1), dtype=np.float64)
    yrel = ys - grid.y0
    cubics = [
        cubic_match(MatchSide.RIGHT, float(wall[j]), float(u_cap[j]), float(z_cap[j]),
                    y_lift, seal)
        for j in range(grid.nx + 1)
    ]
    for i, yy in enumerate(yrel):
        if yy <= tiny:
            vals[i] = trace(s)
        elif yy <= y_lift + tiny:
            tt = yy / rho
            vals[i] = (anti(s + tt) - anti(s - tt)) / (2.0 * tt)
        elif yy < y_lift + seal - tiny:
            vals[i] = [p(yy) for p in cubics]
        else:
            vals[i] = wall

    # columns whose averaging window and wall argument both sit beyond the
    # profile data are constant in exact arithmetic; snap away the rounding
    lo_cols = (s + rt <= pg.lo) & (s_wall <= pg.lo)
    hi_cols = (s - rt >= pg.hi) & (s_wall >= pg.hi)
    vals[:, lo_cols] = alpha
    vals[:, hi_cols] = beta
    return ScalarField2D(grid, vals)


def _constant_starts(values: Sequence[float], n: int, cfg: SweepConfig) -> list[np.ndarray]:
    """Constant vectors at the given values, kept only when the constraints
    admit them.

    A constant is an admissible competitor iff every pinned node equals it and
    every mass average hits its target; infeasible constants would only be
    projected somewhere arbitrary before descending, which buys nothing."""
    out = []
    for v in values:
        ok = True
        for c in cfg.constraint:
            if c.kind is ConstraintKind.DIRICHLET_NODES:
                ok = bool(np.all(c.values == v))
            else:
                # quadrature weights are nonnegative, so the weighted
                # average of a constant is the constant itself
                ok = abs(v - c.target) <= 1e-12 * max(1.0, abs(c.target), abs(v))
            if not ok:
                break
        if ok:
            out.append(np.full(n, v))
    return out


def _map_eps(
    job: Callable[[float], SweepRecord], eps_list: Sequence[float], threads: int
) -> list[SweepRecord]:
    """Run one job per ε, optionally across a thread pool; output stays in ε order.

    Each record's arithmetic is independent of the pool, so multi-threaded
    results are bit-identical to the sequential ones."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1:
        return [job(eps) for eps in eps_list]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, eps_list))


def _run_record(
    model, starts: Sequence[np.ndarray], cfg: SweepConfig, ep: EpsLambda
) -> SweepRecord:
    """Minimize from every start, report the best; failures never abort."""
    start = time.perf_counter()
    best = None
    failures = 0
    for x0 in starts:
        try:
            res = minimize(model, x0, cfg.constraint)
        except (NonFiniteEnergyError, TranslayerError) as exc:
            failures += 1
            log.warning("start at eps=%.4g failed: %s", ep.eps, exc)
            continue
        if best is None or res.energy < best.energy:
            best = res
    wall_ms = int(round(1000.0 * (time.perf_counter() - start)))
    if best is None:
        bd = model.breakdown(np.asarray(starts[0], dtype=np.float64))
        return SweepRecord(ep.eps, ep.lam, ep.L, bd.total, bd, False, wall_ms)
    bd = best.breakdown
    return SweepRecord(ep.eps, ep.lam, ep.L, bd.total, bd, best.converged, wall_ms)


def sweep_f1d(cfg: SweepConfig, *, threads: int = 1) -> list[SweepRecord]:
    """Bulk sweep: minimize the ε-scaled wall energy for each ε in the ladder."""
    grid = cfg.domain
    if not isinstance(grid, Grid1D):
        raise ValueError("sweep_f1d needs a 1-D domain")
    well = cfg.bulk_well
    mid = 0.5 * (grid.lo + grid.hi)
    m_profile: ScalarField1D | None = None
    if cfg.init is InitKind.PROFILE_ANSATZ:
        m_profile = compute_m(well, _ANSATZ_R, _ANSATZ_N).profile
    n_nodes = grid.n + 1

    def one(eps: float) -> SweepRecord:
        ep = _eps_lambda(cfg, eps)
        model = WallEnergy1D(grid, well, bend_coeff=eps**3, pot_coeff=1.0 / eps)
        ramp = np.interp(grid.nodes, [grid.lo, grid.hi], [well.lo, well.hi])
        x0 = ramp
        if m_profile is not None:
            try:
                x0 = profile_ansatz_1d(m_profile, eps, mid, grid).values
            except ValueError as exc:
                log.warning("ansatz init unusable at eps=%.4g (%s); using a ramp", eps, exc)
        # the well constants are admissible competitors whenever the
        # constraints allow them; without a mass constraint they win outright
        starts = [x0, *_constant_starts((well.lo, well.hi), n_nodes, cfg)]
        return _run_record(model, starts, cfg, ep)

    return _map_eps(one, cfg.eps_list, threads)


def sweep_g1d(cfg: SweepConfig, *, threads: int = 1) -> list[SweepRecord]:
    """Boundary sweep: minimize the trace energy with λ tied to (ε, L)."""
    grid = cfg.domain
    if not isinstance(grid, Grid1D):
        raise ValueError("sweep_g1d needs a 1-D domain")
    well = cfg.trace_well
    mid = 0.5 * (grid.lo + grid.hi)
    c_profile: ScalarField1D | None = None
    if cfg.init is InitKind.PROFILE_ANSATZ:
        c_profile = compute_c_under(well, _TRACE_ANSATZ_R, _TRACE_ANSATZ_N).profile
    n_nodes = grid.n + 1

    def one(eps: float) -> SweepRecord:
        ep = _eps_lambda(cfg, eps)
        model = TraceEnergy1D(grid, well, frac_coeff=eps**3 / 8.0, pot_coeff=ep.lam)
        ramp = np.interp(grid.nodes, [grid.lo, grid.hi], [well.lo, well.hi])
        x0 = ramp
        if c_profile is not None:
            try:
                x0 = profile_ansatz_1d(c_profile, ep.rho, mid, grid).values
            except ValueError as exc:
                log.warning("ansatz init unusable at eps=%.4g (%s); using a ramp", eps, exc)
        starts = [x0, *_constant_starts((well.lo, well.hi), n_nodes, cfg)]
        return _run_record(model, starts, cfg, ep)

    return _map_eps(one, cfg.eps_list, threads)


def sweep_full2d(cfg: SweepConfig, *, threads: int = 1) -> list[SweepRecord]:
    """Plate sweep at desk scale: coarse grids, ε capped from below."""
    grid = cfg.domain
    if not isinstance(grid, Grid2D) or grid.shape is not GridShape.RECTANGLE:
        raise ValueError("sweep_full2d needs a rectangle domain")
    if grid.nx > MAX_NODES_2D or grid.ny > MAX_NODES_2D:
        raise ValueError(f"plate sweeps cap the grid at {MAX_NODES_2D} per axis")
    if min(cfg.eps_list) < MIN_EPS_2D:
        raise ValueError(f"plate sweeps cap eps below at {MIN_EPS_2D:.4g}")
    c_profile: ScalarField1D | None = None
    m_profile: ScalarField1D | None = None
    if cfg.init is InitKind.BOUNDARY_LAYER_ANSATZ:
        c_profile = compute_c_under(cfg.trace_well, _TRACE_ANSATZ_R, _TRACE_ANSATZ_N).profile
    elif cfg.init is InitKind.PROFILE_ANSATZ:
        m_profile = compute_m(cfg.bulk_well, _ANSATZ_R, _ANSATZ_N).profile
    h = min(grid.hx, grid.hy)

    def one(eps: float) -> SweepRecord:
        ep = _eps_lambda(cfg, eps)
        if ep.rho / h < LAYER_RESOLUTION:
            log.warning(
                "boundary layer under-resolved at eps=%.4g: rho/h = %.2f < %.1f",
                eps, ep.rho / h, LAYER_RESOLUTION,
            )
        model = FullEnergy2D(grid, cfg.bulk_well, cfg.trace_well, ep)
        ramp = np.interp(
            grid.xs,
            [grid.x0, grid.x0 + grid.nx * grid.hx],
            [cfg.bulk_well.lo, cfg.bulk_well.hi],
        )
        field = ScalarField2D(grid, np.tile(ramp, (grid.ny + 1, 1)))
        try:
            if c_profile is not None:
                field = boundary_layer_ansatz_2d(c_profile, ep, grid)
            elif m_profile is not None:
                mid = grid.x0 + 0.5 * grid.nx * grid.hx
                line = Grid1D(grid.x0, grid.x0 + grid.nx * grid.hx, grid.nx)
                row = profile_ansatz_1d(m_profile, eps, mid, line).values
                field = ScalarField2D(grid, np.tile(row, (grid.ny + 1, 1)))
        except ValueError as exc:
            log.warning("ansatz init unusable at eps=%.4g (%s); using a ramp", eps, exc)
        starts = [
            model.dof_from(field),
            *_constant_starts((cfg.bulk_well.lo, cfg.bulk_well.hi), model.n_dof, cfg),
        ]
        return _run_record(model, starts, cfg, ep)

    return _map_eps(one, cfg.eps_list, threads)


def interior_mass_constraint(grid: Grid2D, target: float) -> Constraint:
    """Average of the field over the plate pinned to ``target``."""
    weights = mask_quadrature(grid)[grid.mask]
    return Constraint.mass_average(weights, target)


def boundary_mass_constraint(grid: Grid2D, target: float) -> Constraint:
    """Average of the bottom-edge trace pinned to ``target``."""
    if grid.shape is not GridShape.RECTANGLE:
        raise ValueError("edge constraints are defined on rectangles")
    weights = np.zeros((grid.ny + 1, grid.nx + 1))
    we = np.full(grid.nx + 1, grid.hx)
    we[0] = we[-1] = 0.5 * grid.hx
    weights[0, :] = we
    return Constraint.mass_average(weights[grid.mask], target)


def plateau_change(records: Sequence[SweepRecord]) -> float:
    """Relative difference of the last two records (the plateau criterion)."""
    if len(records) < 2:
        raise ValueError("plateau detection needs at least two records")
    prev, last = records[-2].min_energy, records[-1].min_energy
    return abs(last - prev) / max(abs(prev), 1e-300)


def transition_energy_fraction(
    field: ScalarField1D,
    well: DoubleWell,
    eps: float,
    *,
    window_width: float | None = None,
) -> float:
    """Fraction of the ε-scaled wall energy inside a window at the transition.

    The window is centered where the slope magnitude peaks and spans
    ``window_width`` (default ``20 * eps``).
    """

    if window_width is None:
        window_width = 20.0 * eps
    grid = field.grid
    v = field.values
    d1 = np.gradient(v, grid.h)
    center = grid.nodes[int(np.argmax(np.abs(d1)))]
    w = grid.trapezoid_weights
    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / grid.h**2
    d2[0] = d2[1]
    d2[-1] = d2[-2]
    density = eps**3 * w * d2 * d2 + (w / eps) * np.asarray(well.eval(v))
    total = float(np.sum(density))
    if total <= 0:
        return 1.0
    inside = np.abs(grid.nodes - center) <= 0.5 * window_width
    return float(np.sum(density[inside])) / total
