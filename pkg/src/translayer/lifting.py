"""Trace lifting: averaging extensions and Hessian-to-seminorm ratios.

A boundary profile g on an interval is lifted into the triangle above it by
window averaging, ``u(x, y) = (1/2y) * integral of g over [x-y, x+y]``. The
integral uses the piecewise-parabolic interpolant of the nodal g, whose
antiderivative is available in closed form per cell, so the extension is
exact for quadratic g at every window — not just up to quadrature error.

The lifting ratio of a profile compares the squared-Hessian energy of a lift
against the half-order seminorm of g'; the explicit average gives an upper
ratio, and minimizing the quadratic Hessian energy over all fields with the
same bottom trace gives the sharp one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import build_mask_stencils, derivative_field, h12_seminorm, h32_seminorm
from .errors import DegenerateTraceError, SolveConvergenceError
from .grid import Grid1D, Grid2D, GridShape, ScalarField1D, ScalarField2D, make_triangle_grid
from .reduction import tree_sum

_AFFINE_TOL = 1e-12


class LiftMethod(Enum):
    EXPLICIT_AVERAGE = "explicit_average"
    QUADRATIC_MINIMUM = "quadratic_minimum"


@dataclass(frozen=True)
class LiftReport:
    numerator: float
    denominator: float
    ratio: float
    method: LiftMethod

    def __post_init__(self) -> None:
        if not self.denominator > 0:
            raise ValueError("lift ratio needs a positive denominator")
        if abs(self.ratio * self.denominator - self.numerator) > 1e-9 * max(
            self.numerator, 1e-300
        ):
            raise ValueError("ratio does not match numerator/denominator")


class _Interpolant:
    """Piecewise-parabolic interpolant of a nodal field with exact integrals.

    Cell k uses the parabola through nodes (k-1, k, k+1); the first cell
    reuses the parabola through (0, 1, 2). Reproduces quadratics exactly.
    """

    def __init__(self, grid: Grid1D, values: np.ndarray) -> None:
        self.lo, self.hi, self.h, self.n = grid.lo, grid.hi, grid.h, grid.n
        f = values
        n, h = self.n, self.h
        center = np.arange(n)
        center[0] = 1  # first cell borrows the second node's parabola
        fc = f[center]
        a1 = 0.5 * (f[center + 1] - f[center - 1])
        a2 = 0.5 * (f[center + 1] - 2.0 * fc + f[center - 1])
        s0 = np.arange(n) - center  # local coordinate of each cell's left edge
        s1 = s0 + 1

        def seg(a, b):  # integral of the cell parabola from local a to local b
            return h * (
                fc * (b - a) + 0.5 * a1 * (b**2 - a**2) + a2 * (b**3 - a**3) / 3.0
            )

        cell_int = seg(s0.astype(np.float64), s1.astype(np.float64))
        cum = np.zeros(n + 1)
        np.cumsum(cell_int, out=cum[1:])
        self._fc, self._a1, self._a2, self._s0, self._cum = fc, a1, a2, s0, cum
        self._center = center

    def _locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xc = np.clip(x, self.lo, self.hi)
        k = np.clip(((xc - self.lo) // self.h).astype(np.int64), 0, self.n - 1)
        s = (xc - (self.lo + self._center[k] * self.h)) / self.h
        return k, s

    def antiderivative(self, x: np.ndarray) -> np.ndarray:
        """Integral of the interpolant from the left end to each x."""
        k, s = self._locate(np.asarray(x, dtype=np.float64))
        s0 = self._s0[k].astype(np.float64)
        return self._cum[k] + self.h * (
            self._fc[k] * (s - s0)
            + 0.5 * self._a1[k] * (s**2 - s0**2)
            + self._a2[k] * (s**3 - s0**3) / 3.0
        )

    def __call__(self, x: np.ndarray) -> np.ndarray:
        k, s = self._locate(np.asarray(x, dtype=np.float64))
        return self._fc[k] + self._a1[k] * s + self._a2[k] * s**2


def average_extension(g: ScalarField1D, grid: Grid2D) -> ScalarField2D:
    """Window-average lift of a boundary profile onto a 2-D grid.

    Node (x, y) receives the average of g over [x - |y|, x + |y|]; the y = 0
    row receives g itself (the limit value). Defined for the triangle above
    the profile's interval and for the diamond, where the result is even in y
    node for node.
    """
    if grid.shape not in (GridShape.TRIANGLE_T_PLUS, GridShape.DIAMOND):
        raise ValueError("averaging extension needs a triangle or diamond grid")
    span = g.grid.hi - g.grid.lo
    if abs(span - grid.size) > 1e-9 * grid.size or abs(g.grid.lo - grid.x0) > 1e-9 * grid.size:
        raise ValueError(
            f"profile window ({g.grid.lo}, {g.grid.hi}) does not match "
            f"the grid base ({grid.x0}, {grid.x0 + grid.size})"
        )
    interp = _Interpolant(g.grid, g.values)
    X, Y = grid.node_xy()
    mask = grid.mask
    out = np.zeros(mask.shape)

    absy = np.abs(Y)
    base = mask & (absy < 0.5 * grid.hy)
    out[base] = interp(X[base])
    body = mask & ~base
    xb, yb = X[body], absy[body]
    out[body] = (interp.antiderivative(xb + yb) - interp.antiderivative(xb - yb)) / (
        2.0 * yb
    )
    return ScalarField2D(grid, out)


def _slope_seminorm(g: ScalarField1D) -> float:
    return h12_seminorm(derivative_field(g))


def lifting_ratio_explicit(g: ScalarField1D) -> LiftReport:
    """Hessian energy of the averaging lift over the seminorm of the slope."""
    den = _slope_seminorm(g)
    if not den > _AFFINE_TOL:
        raise DegenerateTraceError(
            f"slope seminorm {den:.3e} too small; profile is numerically affine"
        )
    span = g.grid.hi - g.grid.lo
    shifted = ScalarField1D(Grid1D(0.0, span, g.grid.n), g.values)
    tri = make_triangle_grid(span, g.grid.n)
    u = average_extension(shifted, tri)
    st = build_mask_stencils(tri)
    num = st.energy(u.values[tri.mask])
    return LiftReport(num, den, num / den, LiftMethod.EXPLICIT_AVERAGE)


def estimate_zeta(g: ScalarField1D, grid: Grid2D, tol: float = 1e-10) -> LiftReport:
    """Sharp lifting ratio: minimize Hessian energy over lifts of g.

    The bottom row is pinned to g; every other node is free (natural
    conditions on the slanted edges). The minimizer solves the positive
    semidefinite stiffness system; the one flat direction over the free nodes
    (the affine-in-y field, which vanishes on the pinned row) is gauge-fixed
    by a bordered solve, and nodes outside every stencil are dropped.
    """
    if grid.shape is not GridShape.TRIANGLE_T_PLUS:
        raise ValueError("the lifting minimum is set on the triangle grid")
    if grid.nx != g.grid.n:
        raise ValueError(
            f"profile has {g.grid.n} cells but the grid base has {grid.nx}"
        )
    span = g.grid.hi - g.grid.lo
    if abs(span - grid.size) > 1e-9 * grid.size:
        raise ValueError("profile window length does not match the grid base")
    den = _slope_seminorm(g)
    if not den > _AFFINE_TOL:
        raise DegenerateTraceError(
            f"slope seminorm {den:.3e} too small; profile is numerically affine"
        )

    st = build_mask_stencils(grid)
    kmat = st.stiffness().tocsr()
    n_masked = st.n_masked

    bottom = st.node_index[0, :]
    frozen = np.zeros(n_masked, dtype=bool)
    frozen[bottom] = True

    touched = np.zeros(n_masked, dtype=bool)
    for smat in (st.sxx, st.sxy, st.syy):
        touched[np.unique(smat.indices)] = True
    unknown = ~frozen & touched
    uidx = np.nonzero(unknown)[0]

    values = np.zeros(n_masked)
    values[bottom] = g.values

    kuu = kmat[uidx][:, uidx].tocsc()
    rhs = -(kmat[uidx][:, bottom] @ g.values)

    # the affine-in-y field is flat for the Hessian form and vanishes on the
    # pinned row, so it spans the null space of the reduced system
    _, yy = grid.node_xy()
    null = yy[grid.mask][uidx]
    null = null / np.linalg.norm(null)

    scale = float(np.mean(np.abs(kuu.diagonal()))) or 1.0
    bordered = sp.bmat(
        [[kuu, (scale * null)[:, None]], [(scale * null)[None, :], None]],
        format="csc",
    )
    try:
        lu = spla.splu(bordered)
    except RuntimeError as exc:
        raise SolveConvergenceError(np.inf, 0) from exc

    def project(vec: np.ndarray) -> np.ndarray:
        return vec - null * float(np.dot(null, vec))

    b = project(rhs)
    bnorm = float(np.linalg.norm(b)) or 1.0
    x = lu.solve(np.concatenate([b, [0.0]]))[:-1]
    cap = int(50 * np.sqrt(uidx.size)) + 1
    for it in range(cap):
        r = project(b - kuu @ x)
        res = float(np.linalg.norm(r)) / bnorm
        if res <= tol:
            break
        x = x + lu.solve(np.concatenate([r, [0.0]]))[:-1]
    else:
        raise SolveConvergenceError(res, cap)

    values[uidx] = x
    num = st.energy(values)
    return LiftReport(num, den, num / den, LiftMethod.QUADRATIC_MINIMUM)


class HardyCheck(NamedTuple):
    lhs: float
    rhs: float
    passed: bool


def _singular_cell(u0: float, du: float, h: float, r: float, quadratic: bool) -> float:
    """Integral over the first cell of the kernel times the linear model of u.

    ``quadratic=False``: kernel (x-a)^{1-r} against u(x) ~ u0 + du*(x-a)/h.
    ``quadratic=True``: kernel (x-a)^{-r} against the running integral of the
    model, u0*(x-a) + du*(x-a)^2/(2h). Divergent cases return inf: u >= 0
    makes every divergence positive.
    """
    if quadratic:
        p1, c1 = 2.0 - r, u0
        p2, c2 = 3.0 - r, 0.5 * du / h
    else:
        p1, c1 = 2.0 - r, u0
        p2, c2 = 3.0 - r, du / h

    def term(power: float, coeff: float) -> float:
        if coeff == 0.0:
            return 0.0
        if power <= 0.0:
            return np.inf
        return coeff * h ** (power - 1.0) * h / power

    return term(p1, c1) + term(p2, c2)


def hardy_check(u: ScalarField1D, r: float, slack: float = 0.0) -> HardyCheck:
    """Weighted-integral comparison for a nonnegative field on (a, b).

    lhs integrates (x-a)^(-r) times the running integral of u; rhs is
    1/(r-1) times the integral of u(x) (x-a)^(1-r). Away from the left end
    both are plain trapezoid sums; on the first cell the singular kernel is
    integrated in closed form against the linear model of u there.
    """
    if not r > 1.0:
        raise ValueError(f"the comparison needs r > 1, got {r}")
    v = u.values
    if np.any(v < 0.0):
        raise ValueError("field must be nonnegative")
    grid = u.grid
    h, n = grid.h, grid.n
    dist = grid.nodes - grid.lo  # 0 at the left end

    running = np.zeros(n + 1)
    np.cumsum(0.5 * h * (v[:-1] + v[1:]), out=running[1:])

    w = np.full(n + 1, h)
    w[1] = w[-1] = 0.5 * h  # trapezoid over [a+h, b]; node 0 handled exactly
    w[0] = 0.0

    lhs_first = _singular_cell(float(v[0]), float(v[1] - v[0]), h, r, quadratic=True)
    lhs_nodes = w[1:] * dist[1:] ** (-r) * running[1:]
    lhs = lhs_first + tree_sum(lhs_nodes)

    rhs_first = _singular_cell(float(v[0]), float(v[1] - v[0]), h, r, quadratic=False)
    rhs_nodes = w[1:] * dist[1:] ** (1.0 - r) * v[1:]
    rhs = (rhs_first + tree_sum(rhs_nodes)) / (r - 1.0)

    passed = bool(lhs <= rhs + slack + 1e-12 * (1.0 + abs(rhs)))
    return HardyCheck(float(lhs), float(rhs), passed)


class SeminormComparison(NamedTuple):
    h32: float
    bound: float
    passed: bool


def seminorm_comparison_check(
    u: ScalarField1D, slack: float | None = None
) -> SeminormComparison:
    """Check the three-halves seminorm against one eighth of the slope's
    half-order seminorm; the discrete forms obey it up to O(1/n) slack."""
    if u.grid.n % 2:
        raise ValueError("the comparison needs an even number of cells")
    if slack is None:
        slack = 12.8 / u.grid.n
    h32 = h32_seminorm(u)
    bound = 0.125 * h12_seminorm(derivative_field(u))
    return SeminormComparison(h32, bound, bool(h32 <= bound + slack))
