"""Discrete energies for transition-layer problems.

One dimension: bending (squared second derivative), double-well potential,
and two fractional seminorms — the half-order form used on boundary traces
and the three-halves-order form used for lifted comparisons. Two dimensions:
the full plate energy (squared Hessian over a masked region, bulk potential,
boundary-trace potential).

Every kernel here has a loop-based twin in the test suite's reference module;
the discrete definitions (stencil tables, quadrature weights, pair sets) must
stay aligned with those references, so change both or neither.

Totals are reduced with :func:`translayer.reduction.tree_sum` so repeated
runs produce bit-identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import Grid1D, Grid2D, GridShape, ScalarField1D, ScalarField2D
from .potentials import DoubleWell
from .reduction import tree_sum

#: A profile is admissible for the full-line seminorm when its one-sided
#: boundary slopes are at most this fraction of the largest slope.
BOUNDARY_SLOPE_TOL = 1e-8


# --------------------------------------------------------------------------
# parameter bundle


@dataclass(frozen=True)
class EpsLambda:
    """Layer-width parameter ``eps`` and boundary coupling ``lam``.

    The derived quantities are the critical combination ``L = eps * lam**(2/3)``
    and the trace-layer width ``rho = eps * lam**(-1/3)``.
    """

    eps: float
    lam: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise ValueError(f"eps must be positive and finite, got {self.eps}")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be positive and finite, got {self.lam}")

    @property
    def L(self) -> float:
        return self.eps * self.lam ** (2.0 / 3.0)

    @property
    def rho(self) -> float:
        return self.eps * self.lam ** (-1.0 / 3.0)

    @classmethod
    def from_critical(cls, eps: float, L: float) -> "EpsLambda":
        """Pick ``lam`` so that ``eps * lam**(2/3)`` equals ``L``."""
        if not (np.isfinite(L) and L > 0):
            raise ValueError(f"L must be positive and finite, got {L}")
        return cls(eps, (L / eps) ** 1.5)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Additive pieces of an energy value; absent pieces are zero."""

    bending: float = 0.0
    potential: float = 0.0
    fractional: float = 0.0
    boundary_potential: float = 0.0

    def __post_init__(self) -> None:
        for name in ("bending", "potential", "fractional", "boundary_potential"):
            v = getattr(self, name)
            if np.isnan(v) or v < 0.0:
                raise ValueError(f"{name} term must be non-negative, got {v}")

    @property
    def total(self) -> float:
        return self.bending + self.potential + self.fractional + self.boundary_potential


# --------------------------------------------------------------------------
# 1-D kernels


def _first_derivative_values(h: float, f: np.ndarray) -> np.ndarray:
    """Centered differences inside, one-sided second-order at the two ends."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def _second_derivative_values(h: float, f: np.ndarray) -> np.ndarray:
    out = np.empty_like(f)
    out[1:-1] = (f[:-2] - 2.0 * f[1:-1] + f[2:]) / h**2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return out


def derivative_field(f: ScalarField1D) -> ScalarField1D:
    """Nodal first derivative of a nodal field (exact on quadratics)."""
    return f.with_values(_first_derivative_values(f.grid.h, f.values))


def bending_energy(f: ScalarField1D) -> float:
    """Trapezoid integral of the squared discrete second derivative."""
    d2 = _second_derivative_values(f.grid.h, f.values)
    return tree_sum(f.grid.trapezoid_weights * d2 * d2)


def potential_integral(f: ScalarField1D, well: DoubleWell) -> float:
    """Trapezoid integral of ``well`` evaluated along the field."""
    return tree_sum(f.grid.trapezoid_weights * np.asarray(well.eval(f.values)))


def _h12_values(g: np.ndarray) -> float:
    """Half-order seminorm of nodal values: midpoint double sum + slope diagonal.

    The lattice form is dimensionless, so no grid spacing enters.
    """
    mids = 0.5 * (g[1:] + g[:-1])
    n = mids.size
    idx = np.arange(n, dtype=np.float64)
    dist2 = (idx[:, None] - idx[None, :]) ** 2
    np.fill_diagonal(dist2, 1.0)  # dummy, masked out below
    diff = mids[:, None] - mids[None, :]
    terms = diff * diff / dist2
    np.fill_diagonal(terms, 0.0)
    slopes = np.diff(g)
    return tree_sum(terms) + tree_sum(slopes * slopes)


def h12_seminorm(g: ScalarField1D) -> float:
    """Squared discrete H^{1/2} seminorm of a nodal field on its window."""
    return _h12_values(g.values)


def _tail_weights(grid: Grid1D) -> np.ndarray:
    """Per-node weights for the constant-outside tail integral.

    Interior nodes carry ``2*h*(1/(hi-x) + 1/(x-lo))``; the two boundary
    nodes, where the kernel is singular but the integrand is required to
    vanish, carry zero by definition.
    """
    x = grid.nodes
    tw = np.zeros_like(x)
    tw[1:-1] = 2.0 * grid.h * (1.0 / (grid.hi - x[1:-1]) + 1.0 / (x[1:-1] - grid.lo))
    return tw


def h12_seminorm_fullline(g: ScalarField1D) -> float:
    """Squared H^{1/2} seminorm of the derivative of ``g`` over the whole line.

    ``g`` is treated as constant outside its window, which is only consistent
    when its slope vanishes at the window ends; profiles violating that (one-
    sided slope above ``BOUNDARY_SLOPE_TOL`` times the largest slope) are
    rejected. The value is the window seminorm of the derivative field plus
    the exact integral of the window/outside interaction.
    """
    u = _first_derivative_values(g.grid.h, g.values)
    peak = float(np.max(np.abs(u)))
    worst_end = max(abs(float(u[0])), abs(float(u[-1])))
    if worst_end > BOUNDARY_SLOPE_TOL * peak:
        raise ValueError(
            "profile slope must vanish at the window ends for the full-line "
            f"seminorm; boundary slope {worst_end:.3e} vs peak {peak:.3e}"
        )
    tails = tree_sum(_tail_weights(g.grid) * u * u)
    return _h12_values(u) + tails


def h32_seminorm(u: ScalarField1D) -> float:
    """Squared discrete H^{3/2} seminorm: second differences over even-sum
    node pairs plus a curvature diagonal, with half weights at the ends."""
    v = u.values
    h = u.grid.h
    n = u.grid.n
    if n % 2:
        raise ValueError("the sampled second differences need an even number of cells")
    wt = np.ones(n + 1)
    wt[0] = wt[-1] = 0.5

    d2 = _second_derivative_values(h, v)
    diag = (2.0 * h * h * wt * wt) * (d2 * d2) / 16.0

    i, j = np.triu_indices(n + 1, k=1)
    even = (i + j) % 2 == 0
    i, j = i[even], j[even]
    m = (i + j) // 2
    second = v[i] - 2.0 * v[m] + v[j]
    off = (2.0 * h * h * wt[i] * wt[j]) * second**2 / (h * (j - i).astype(np.float64)) ** 4
    # the reference double loop visits each unordered pair twice
    return tree_sum(diag) + 2.0 * tree_sum(off)


def f_eps(f: ScalarField1D, well: DoubleWell, eps: float) -> EnergyBreakdown:
    """Rescaled bulk layer energy: ``eps^3`` bending plus ``1/eps`` potential."""
    if not (np.isfinite(eps) and eps > 0):
        raise ValueError(f"eps must be positive and finite, got {eps}")
    return EnergyBreakdown(
        bending=eps**3 * bending_energy(f),
        potential=potential_integral(f, well) / eps,
    )


def g_eps(v: ScalarField1D, well: DoubleWell, ep: EpsLambda) -> EnergyBreakdown:
    """Trace layer energy: ``eps^3/8`` half-order seminorm of the slope plus
    ``lam`` times the boundary potential."""
    frac = (ep.eps**3 / 8.0) * _h12_values(_first_derivative_values(v.grid.h, v.values))
    return EnergyBreakdown(
        fractional=frac,
        boundary_potential=ep.lam * potential_integral(v, well),
    )


# --------------------------------------------------------------------------
# masked 2-D stencils

_SECOND_KINDS = (
    ((-1, 0, 1), (1.0, -2.0, 1.0)),
    ((0, 1, 2, 3), (2.0, -5.0, 4.0, -1.0)),
    ((0, -1, -2, -3), (2.0, -5.0, 4.0, -1.0)),
)
_FIRST_KINDS = {
    "C": ((-1, 0, 1), (-0.5, 0.0, 0.5)),
    "F": ((0, 1, 2), (-1.5, 2.0, -0.5)),
    "B": ((0, -1, -2), (1.5, -2.0, 0.5)),
}
_MIXED_ORDER = (
    ("C", "C"), ("C", "F"), ("C", "B"), ("F", "C"), ("B", "C"),
    ("F", "F"), ("F", "B"), ("B", "F"), ("B", "B"),
)


def _shifted(mask: np.ndarray, dj: int, di: int) -> np.ndarray:
    """``out[j, i] = mask[j + dj, i + di]`` with False outside the lattice."""
    ny, nx = mask.shape
    out = np.zeros_like(mask)
    j0, j1 = max(0, -dj), min(ny, ny - dj)
    i0, i1 = max(0, -di), min(nx, nx - di)
    if j0 < j1 and i0 < i1:
        out[j0:j1, i0:i1] = mask[j0 + dj : j1 + dj, i0 + di : i1 + di]
    return out


def _choose_second(mask: np.ndarray, axis: int) -> np.ndarray:
    """Per node, the first second-derivative stencil whose support is masked.

    Preference order: centered, forward one-sided, backward one-sided; -1
    where none fits. ``axis`` 0 offsets rows (d/dy), 1 offsets columns.
    """
    chosen = np.full(mask.shape, -1, dtype=np.int8)
    for k, (offs, _) in enumerate(_SECOND_KINDS):
        sup = mask.copy()
        for o in offs:
            sup &= _shifted(mask, o if axis == 0 else 0, o if axis == 1 else 0)
        chosen[(chosen < 0) & sup] = k
    return chosen


def _choose_mixed(mask: np.ndarray) -> np.ndarray:
    chosen = np.full(mask.shape, -1, dtype=np.int8)
    for k, (sy, sx) in enumerate(_MIXED_ORDER):
        offy = _FIRST_KINDS[sy][0]
        offx = _FIRST_KINDS[sx][0]
        sup = mask.copy()
        for oy in offy:
            for ox in offx:
                sup &= _shifted(mask, oy, ox)
        chosen[(chosen < 0) & sup] = k
    return chosen


class MaskStencils:
    """Sparse Hessian stencils over the masked nodes of a 2-D grid.

    Rows cover the nodes where all three second derivatives admit a full
    stencil (others contribute nothing to Hessian quadrature). Columns index
    masked nodes in row-major order. ``w`` holds the product-trapezoid
    quadrature weight of each row's node.
    """

    def __init__(
        self,
        grid: Grid2D,
        kept: np.ndarray,
        node_index: np.ndarray,
        row_j: np.ndarray,
        row_i: np.ndarray,
        w: np.ndarray,
        sxx: sp.csr_matrix,
        sxy: sp.csr_matrix,
        syy: sp.csr_matrix,
    ) -> None:
        self.grid = grid
        self.kept = kept
        self.node_index = node_index
        self.row_j = row_j
        self.row_i = row_i
        self.w = w
        self.sxx = sxx
        self.sxy = sxy
        self.syy = syy

    @property
    def n_masked(self) -> int:
        return self.sxx.shape[1]

    def term_integrals(self, masked_values: np.ndarray) -> tuple[float, float, float]:
        """Weighted integrals of ``uxx^2``, ``uxy^2``, ``uyy^2`` (no multiplicity)."""
        txx = self.sxx @ masked_values
        txy = self.sxy @ masked_values
        tyy = self.syy @ masked_values
        return (
            tree_sum(self.w * txx * txx),
            tree_sum(self.w * txy * txy),
            tree_sum(self.w * tyy * tyy),
        )

    def energy(self, masked_values: np.ndarray) -> float:
        xx, xy, yy = self.term_integrals(masked_values)
        return xx + 2.0 * xy + yy

    def energy_gradient(self, masked_values: np.ndarray) -> np.ndarray:
        g = 2.0 * (self.sxx.T @ (self.w * (self.sxx @ masked_values)))
        g += 4.0 * (self.sxy.T @ (self.w * (self.sxy @ masked_values)))
        g += 2.0 * (self.syy.T @ (self.w * (self.syy @ masked_values)))
        return g

    def stiffness(self) -> sp.csr_matrix:
        """Quadratic-form matrix K with ``u^T K u`` equal to :meth:`energy`."""
        wd = sp.diags(self.w)
        k = self.sxx.T @ wd @ self.sxx
        k = k + 2.0 * (self.sxy.T @ wd @ self.sxy)
        k = k + self.syy.T @ wd @ self.syy
        return k.tocsr()


def build_mask_stencils(grid: Grid2D) -> MaskStencils:
    mask = grid.mask
    cx = _choose_second(mask, axis=1)
    cy = _choose_second(mask, axis=0)
    cm = _choose_mixed(mask)
    kept = mask & (cx >= 0) & (cy >= 0) & (cm >= 0)

    n_masked = int(mask.sum())
    node_index = np.full(mask.shape, -1, dtype=np.int64)
    node_index[mask] = np.arange(n_masked)
    nrows = int(kept.sum())
    row_of = np.full(mask.shape, -1, dtype=np.int64)
    row_of[kept] = np.arange(nrows)
    row_j, row_i = np.nonzero(kept)

    full_x = _shifted(mask, 0, -1) & _shifted(mask, 0, 1)
    full_y = _shifted(mask, -1, 0) & _shifted(mask, 1, 0)
    wi = np.where(full_x, 1.0, 0.5)
    wj = np.where(full_y, 1.0, 0.5)
    w = (wi * wj * grid.hx * grid.hy)[kept]

    def second_matrix(choice: np.ndarray, axis: int, scale: float) -> sp.csr_matrix:
        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        vals: list[np.ndarray] = []
        for k, (offs, coeffs) in enumerate(_SECOND_KINDS):
            sel = kept & (choice == k)
            if not sel.any():
                continue
            jj, ii = np.nonzero(sel)
            r = row_of[jj, ii]
            for o, c in zip(offs, coeffs):
                rows.append(r)
                if axis == 0:
                    cols.append(node_index[jj + o, ii])
                else:
                    cols.append(node_index[jj, ii + o])
                vals.append(np.full(r.size, c * scale))
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(nrows, n_masked),
        ).tocsr()

    def mixed_matrix() -> sp.csr_matrix:
        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        vals: list[np.ndarray] = []
        scale = 1.0 / (grid.hx * grid.hy)
        for k, (sy, sx) in enumerate(_MIXED_ORDER):
            sel = kept & (cm == k)
            if not sel.any():
                continue
            jj, ii = np.nonzero(sel)
            r = row_of[jj, ii]
            offy, cyc = _FIRST_KINDS[sy]
            offx, cxc = _FIRST_KINDS[sx]
            for oy, cyv in zip(offy, cyc):
                for ox, cxv in zip(offx, cxc):
                    if cyv * cxv == 0.0:
                        continue
                    rows.append(r)
                    cols.append(node_index[jj + oy, ii + ox])
                    vals.append(np.full(r.size, cyv * cxv * scale))
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(nrows, n_masked),
        ).tocsr()

    sxx = second_matrix(cx, axis=1, scale=1.0 / grid.hx**2)
    syy = second_matrix(cy, axis=0, scale=1.0 / grid.hy**2)
    sxy = mixed_matrix()
    return MaskStencils(grid, kept, node_index, row_j, row_i, w, sxx, sxy, syy)


def mask_quadrature(grid: Grid2D) -> np.ndarray:
    """Product-trapezoid node weights (zero off the mask)."""
    mask = grid.mask
    full_x = _shifted(mask, 0, -1) & _shifted(mask, 0, 1)
    full_y = _shifted(mask, -1, 0) & _shifted(mask, 1, 0)
    wi = np.where(full_x, 1.0, 0.5)
    wj = np.where(full_y, 1.0, 0.5)
    return np.where(mask, wi * wj * grid.hx * grid.hy, 0.0)


@dataclass(frozen=True)
class HessianTerms:
    """Integrals of the three squared second derivatives over the mask."""

    xx: float
    xy: float
    yy: float


def hessian_terms_2d(u: ScalarField2D) -> HessianTerms:
    st = build_mask_stencils(u.grid)
    xx, xy, yy = st.term_integrals(u.values[u.grid.mask])
    return HessianTerms(xx, xy, yy)


def hessian_energy_2d(u: ScalarField2D) -> float:
    """Integral of ``uxx^2 + 2 uxy^2 + uyy^2`` over the masked region."""
    t = hessian_terms_2d(u)
    return t.xx + 2.0 * t.xy + t.yy


def potential_integral_2d(u: ScalarField2D, well: DoubleWell) -> float:
    q = mask_quadrature(u.grid)[u.grid.mask]
    vals = np.asarray(well.eval(u.values[u.grid.mask]))
    return tree_sum(q * vals)


_EDGES = ("bottom", "top", "left", "right")


def boundary_trace(u: ScalarField2D, edge: str = "bottom") -> ScalarField1D:
    """Restriction of a rectangle field to one edge, as a 1-D field."""
    g2 = u.grid
    if g2.shape is not GridShape.RECTANGLE:
        raise ValueError("boundary traces are defined on rectangle grids only")
    if edge not in _EDGES:
        raise ValueError(f"edge must be one of {_EDGES}, got {edge!r}")
    if edge in ("bottom", "top"):
        vals = u.values[0, :] if edge == "bottom" else u.values[-1, :]
        line = Grid1D(g2.x0, g2.x0 + g2.nx * g2.hx, g2.nx)
    else:
        vals = u.values[:, 0] if edge == "left" else u.values[:, -1]
        line = Grid1D(g2.y0, g2.y0 + g2.ny * g2.hy, g2.ny)
    return ScalarField1D(line, vals)


def full_energy_2d(
    u: ScalarField2D,
    bulk_well: DoubleWell,
    boundary_well: DoubleWell,
    ep: EpsLambda,
    boundary_edge: str = "bottom",
) -> EnergyBreakdown:
    """Plate energy: ``eps^3`` Hessian + ``1/eps`` bulk potential + ``lam``
    times the potential of the trace on one edge. Rectangles only."""
    trace = boundary_trace(u, boundary_edge)
    return EnergyBreakdown(
        bending=ep.eps**3 * hessian_energy_2d(u),
        potential=potential_integral_2d(u, bulk_well) / ep.eps,
        boundary_potential=ep.lam
        * tree_sum(trace.grid.trapezoid_weights * np.asarray(boundary_well.eval(trace.values))),
    )


# --------------------------------------------------------------------------
# differentiable energy models (consumed by the minimizer)


def _d1_matrix(n: int, h: float) -> sp.csr_matrix:
    """Matrix form of the nodal first-derivative field."""
    rows = [np.arange(1, n), np.arange(1, n), np.array([0, 0, 0]), np.array([n, n, n])]
    cols = [np.arange(2, n + 1), np.arange(0, n - 1), np.array([0, 1, 2]), np.array([n, n - 1, n - 2])]
    vals = [
        np.full(n - 1, 0.5 / h),
        np.full(n - 1, -0.5 / h),
        np.array([-1.5, 2.0, -0.5]) / h,
        np.array([1.5, -2.0, 0.5]) / h,
    ]
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n + 1, n + 1),
    ).tocsr()


def _d2_matrix(n: int, h: float) -> sp.csr_matrix:
    """Matrix form of the nodal second-derivative field."""
    interior = np.arange(1, n)
    rows = [interior, interior, interior, np.zeros(4, int), np.full(4, n)]
    cols = [interior - 1, interior, interior + 1, np.arange(4), n - np.arange(4)]
    vals = [
        np.full(n - 1, 1.0 / h**2),
        np.full(n - 1, -2.0 / h**2),
        np.full(n - 1, 1.0 / h**2),
        np.array([2.0, -5.0, 4.0, -1.0]) / h**2,
        np.array([2.0, -5.0, 4.0, -1.0]) / h**2,
    ]
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n + 1, n + 1),
    ).tocsr()


def _midpoint_matrix(n: int) -> sp.csr_matrix:
    rows = np.repeat(np.arange(n), 2)
    cols = np.empty(2 * n, dtype=np.int64)
    cols[0::2] = np.arange(n)
    cols[1::2] = np.arange(1, n + 1)
    return sp.coo_matrix((np.full(2 * n, 0.5), (rows, cols)), shape=(n, n + 1)).tocsr()


def _diff_matrix(n: int) -> sp.csr_matrix:
    rows = np.repeat(np.arange(n), 2)
    cols = np.empty(2 * n, dtype=np.int64)
    cols[0::2] = np.arange(n)
    cols[1::2] = np.arange(1, n + 1)
    vals = np.tile(np.array([-1.0, 1.0]), n)
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n + 1)).tocsr()


def _well_curvature(well: DoubleWell, x: np.ndarray) -> np.ndarray:
    """Nonnegative curvature model of the potential for damped Newton steps.

    Central differences of deriv, clamped at zero. The clamp keeps every
    curvature system positive semidefinite: between the wells the true
    potential curvature is negative, and exact-Hessian steps taken there can
    jump into a different (higher) basin — the clamped model behaves like an
    implicit gradient step instead and follows the descent basin. Near a
    minimizer the clamp is active only on the thin transition band, so steps
    stay Newton-fast. Only the step solver consumes this; gradients and
    energies are exact.
    """
    delta = 1e-6 * (1.0 + np.abs(x))
    curv = (np.asarray(well.deriv(x + delta)) - np.asarray(well.deriv(x - delta))) / (
        2.0 * delta
    )
    return np.maximum(curv, 0.0)


class WallEnergy1D:
    """``bend_coeff * ∫|f''|^2 + pot_coeff * ∫W(f)`` on a 1-D window."""

    def __init__(
        self,
        grid: Grid1D,
        well: DoubleWell,
        bend_coeff: float = 1.0,
        pot_coeff: float = 1.0,
    ) -> None:
        if bend_coeff <= 0 or pot_coeff <= 0:
            raise ValueError("energy coefficients must be positive")
        self.grid = grid
        self.well = well
        self.bend_coeff = float(bend_coeff)
        self.pot_coeff = float(pot_coeff)
        self._d2 = _d2_matrix(grid.n, grid.h)
        self._w = grid.trapezoid_weights
        self._quad_hess: sp.csr_matrix | None = None

    @property
    def n_dof(self) -> int:
        return self.grid.n + 1

    def value(self, x: np.ndarray) -> float:
        d2 = self._d2 @ x
        bend = tree_sum(self._w * d2 * d2)
        pot = tree_sum(self._w * np.asarray(self.well.eval(x)))
        return self.bend_coeff * bend + self.pot_coeff * pot

    def gradient(self, x: np.ndarray) -> np.ndarray:
        d2 = self._d2 @ x
        g = 2.0 * self.bend_coeff * (self._d2.T @ (self._w * d2))
        g += self.pot_coeff * self._w * np.asarray(self.well.deriv(x))
        return g

    def breakdown(self, x: np.ndarray) -> EnergyBreakdown:
        d2 = self._d2 @ x
        return EnergyBreakdown(
            bending=self.bend_coeff * tree_sum(self._w * d2 * d2),
            potential=self.pot_coeff * tree_sum(self._w * np.asarray(self.well.eval(x))),
        )

    def hessian(self, x: np.ndarray) -> sp.csr_matrix:
        if self._quad_hess is None:
            self._quad_hess = (
                2.0 * self.bend_coeff * (self._d2.T @ sp.diags(self._w) @ self._d2)
            ).tocsr()
        curv = self.pot_coeff * self._w * _well_curvature(self.well, x)
        return (self._quad_hess + sp.diags(curv)).tocsr()

    def field_from(self, x: np.ndarray) -> ScalarField1D:
        return ScalarField1D(self.grid, x)


class TraceEnergy1D:
    """``frac_coeff * |f'|^2_{H^{1/2}} + pot_coeff * ∫V(f)`` on a window.

    With ``full_line=True`` the seminorm includes the constant-outside tail
    integral. The model itself does not enforce the vanishing-slope
    admissibility gate (pinned boundary nodes do); the reporting kernel
    :func:`h12_seminorm_fullline` does.
    """

    def __init__(
        self,
        grid: Grid1D,
        well: DoubleWell,
        frac_coeff: float,
        pot_coeff: float = 1.0,
        full_line: bool = False,
    ) -> None:
        if frac_coeff <= 0 or pot_coeff <= 0:
            raise ValueError("energy coefficients must be positive")
        self.grid = grid
        self.well = well
        self.frac_coeff = float(frac_coeff)
        self.pot_coeff = float(pot_coeff)
        self.full_line = bool(full_line)
        n = grid.n
        self._d1 = _d1_matrix(n, grid.h)
        self._mid = _midpoint_matrix(n)
        self._diff = _diff_matrix(n)
        idx = np.arange(n, dtype=np.float64)
        dist2 = (idx[:, None] - idx[None, :]) ** 2
        np.fill_diagonal(dist2, 1.0)
        kmat = 1.0 / dist2
        np.fill_diagonal(kmat, 0.0)
        self._k = kmat
        self._k_rowsum = kmat.sum(axis=1)
        self._tw = _tail_weights(grid) if full_line else np.zeros(n + 1)
        self._wq = grid.trapezoid_weights
        self._quad_hess: np.ndarray | None = None

    @property
    def n_dof(self) -> int:
        return self.grid.n + 1

    def _fractional_value(self, x: np.ndarray) -> float:
        u = self._d1 @ x
        m = self._mid @ u
        km = self._k @ m
        off = 2.0 * (tree_sum(self._k_rowsum * m * m) - float(np.dot(m, km)))
        d = self._diff @ u
        val = off + tree_sum(d * d)
        if self.full_line:
            val += tree_sum(self._tw * u * u)
        return val

    def value(self, x: np.ndarray) -> float:
        pot = tree_sum(self._wq * np.asarray(self.well.eval(x)))
        return self.frac_coeff * self._fractional_value(x) + self.pot_coeff * pot

    def gradient(self, x: np.ndarray) -> np.ndarray:
        u = self._d1 @ x
        m = self._mid @ u
        gm = 4.0 * (self._k_rowsum * m - self._k @ m)
        gu = self._mid.T @ gm + 2.0 * (self._diff.T @ (self._diff @ u))
        if self.full_line:
            gu += 2.0 * self._tw * u
        g = self.frac_coeff * (self._d1.T @ gu)
        g += self.pot_coeff * self._wq * np.asarray(self.well.deriv(x))
        return g

    def breakdown(self, x: np.ndarray) -> EnergyBreakdown:
        return EnergyBreakdown(
            fractional=self.frac_coeff * self._fractional_value(x),
            boundary_potential=self.pot_coeff
            * tree_sum(self._wq * np.asarray(self.well.eval(x))),
        )

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self._quad_hess is None:
            mid_d1 = (self._mid @ self._d1).toarray()
            hess_m = 4.0 * (np.diag(self._k_rowsum) - self._k)
            hq = mid_d1.T @ hess_m @ mid_d1
            diff_d1 = (self._diff @ self._d1).toarray()
            hq += 2.0 * diff_d1.T @ diff_d1
            if self.full_line:
                d1 = self._d1.toarray()
                hq += d1.T @ (2.0 * self._tw[:, None] * d1)
            self._quad_hess = self.frac_coeff * hq
        curv = self.pot_coeff * self._wq * _well_curvature(self.well, x)
        return self._quad_hess + np.diag(curv)

    def field_from(self, x: np.ndarray) -> ScalarField1D:
        return ScalarField1D(self.grid, x)


class FullEnergy2D:
    """Plate energy on a rectangle as a differentiable model.

    Degrees of freedom are the node values in row-major order. One edge
    carries the boundary potential.
    """

    def __init__(
        self,
        grid: Grid2D,
        bulk_well: DoubleWell,
        boundary_well: DoubleWell,
        ep: EpsLambda,
        boundary_edge: str = "bottom",
    ) -> None:
        if grid.shape is not GridShape.RECTANGLE:
            raise ValueError("the plate model is defined on rectangle grids only")
        if boundary_edge not in _EDGES:
            raise ValueError(f"edge must be one of {_EDGES}, got {boundary_edge!r}")
        self.grid = grid
        self.bulk_well = bulk_well
        self.boundary_well = boundary_well
        self.ep = ep
        self.boundary_edge = boundary_edge
        self._st = build_mask_stencils(grid)
        self._wq = mask_quadrature(grid)[grid.mask]

        node_index = self._st.node_index
        if boundary_edge == "bottom":
            edge_nodes, nseg, hseg = node_index[0, :], grid.nx, grid.hx
        elif boundary_edge == "top":
            edge_nodes, nseg, hseg = node_index[-1, :], grid.nx, grid.hx
        elif boundary_edge == "left":
            edge_nodes, nseg, hseg = node_index[:, 0], grid.ny, grid.hy
        else:
            edge_nodes, nseg, hseg = node_index[:, -1], grid.ny, grid.hy
        self._edge_pos = edge_nodes
        we = np.full(nseg + 1, hseg)
        we[0] = we[-1] = 0.5 * hseg
        self._we = we
        self._quad_hess: sp.csr_matrix | None = None

    @property
    def n_dof(self) -> int:
        return self._st.n_masked

    def value(self, x: np.ndarray) -> float:
        bend = self._st.energy(x)
        pot = tree_sum(self._wq * np.asarray(self.bulk_well.eval(x)))
        tr = x[self._edge_pos]
        bpot = tree_sum(self._we * np.asarray(self.boundary_well.eval(tr)))
        return self.ep.eps**3 * bend + pot / self.ep.eps + self.ep.lam * bpot

    def gradient(self, x: np.ndarray) -> np.ndarray:
        g = self.ep.eps**3 * self._st.energy_gradient(x)
        g += self._wq * np.asarray(self.bulk_well.deriv(x)) / self.ep.eps
        tr = x[self._edge_pos]
        g_edge = self.ep.lam * self._we * np.asarray(self.boundary_well.deriv(tr))
        np.add.at(g, self._edge_pos, g_edge)
        return g

    def breakdown(self, x: np.ndarray) -> EnergyBreakdown:
        tr = x[self._edge_pos]
        return EnergyBreakdown(
            bending=self.ep.eps**3 * self._st.energy(x),
            potential=tree_sum(self._wq * np.asarray(self.bulk_well.eval(x))) / self.ep.eps,
            boundary_potential=self.ep.lam
            * tree_sum(self._we * np.asarray(self.boundary_well.eval(tr))),
        )

    def hessian(self, x: np.ndarray) -> sp.csr_matrix:
        if self._quad_hess is None:
            self._quad_hess = (2.0 * self.ep.eps**3 * self._st.stiffness()).tocsr()
        diag = self._wq * _well_curvature(self.bulk_well, x) / self.ep.eps
        tr = x[self._edge_pos]
        edge_curv = self.ep.lam * self._we * _well_curvature(self.boundary_well, tr)
        np.add.at(diag, self._edge_pos, edge_curv)
        return (self._quad_hess + sp.diags(diag)).tocsr()

    def field_from(self, x: np.ndarray) -> ScalarField2D:
        vals = np.zeros(self.grid.mask.shape)
        vals[self.grid.mask] = x
        return ScalarField2D(self.grid, vals)

    def dof_from(self, field: ScalarField2D) -> np.ndarray:
        return field.values[self.grid.mask].copy()
