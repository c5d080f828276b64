"""Uniform 1-D and masked 2-D grids with nodal scalar fields.

All discretizations in the package live on these types. Grids are immutable;
fields hold a read-only value array aligned with the grid nodes. 2-D grids
carry a boolean node mask selecting the covered region (full rectangle, the
slanted half-triangle used for trace lifting, or the symmetric diamond).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable

import numpy as np

__all__ = [
    "Grid1D",
    "ScalarField1D",
    "GridShape",
    "Grid2D",
    "ScalarField2D",
    "make_grid_1d",
    "sample",
    "make_triangle_grid",
    "make_diamond_grid",
    "make_rectangle_grid",
    "sample_2d",
    "triangle_contains",
    "diamond_contains",
]

# Relative slack used when testing node membership against slanted edges.
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [lo, hi] with n cells (n+1 nodes)."""

    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("grid bounds must be finite")
        if self.hi <= self.lo:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"need at least 4 cells, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.lo, self.hi, self.n + 1)
        x.setflags(write=False)
        return x

    @cached_property
    def midpoints(self) -> np.ndarray:
        m = self.lo + (np.arange(self.n) + 0.5) * self.h
        m.setflags(write=False)
        return m

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        w.setflags(write=False)
        return w

    def refined(self) -> "Grid1D":
        """Same interval with every cell split in two."""
        return Grid1D(self.lo, self.hi, 2 * self.n)


@dataclass(frozen=True)
class ScalarField1D:
    """Nodal values on a Grid1D. Values are finite and read-only."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != (self.grid.n + 1,):
            raise ValueError(
                f"values shape {v.shape} does not match grid with {self.grid.n + 1} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "ScalarField1D":
        return ScalarField1D(self.grid, values)


def make_grid_1d(lo: float, hi: float, n: int) -> Grid1D:
    return Grid1D(lo, hi, n)


def sample(grid: Grid1D, fn: Callable[[np.ndarray], np.ndarray]) -> ScalarField1D:
    """Evaluate a callable on the grid nodes (vectorized)."""
    return ScalarField1D(grid, np.asarray(fn(grid.nodes), dtype=np.float64))


class GridShape(Enum):
    RECTANGLE = "rectangle"
    TRIANGLE_T_PLUS = "triangle_t_plus"
    DIAMOND = "diamond"


def triangle_contains(R: float, x: float, y: float) -> bool:
    """Closure of the half-triangle {0 < y < R/2, y < x < R - y}."""
    tol = _EDGE_TOL * R
    return (-tol <= y <= R / 2 + tol) and (y - tol <= x <= R - y + tol)


def diamond_contains(R: float, x: float, y: float) -> bool:
    """Closure of the diamond {0 <= x <= R, |y| <= min(x, R - x)}."""
    tol = _EDGE_TOL * R
    return (-tol <= x <= R + tol) and abs(y) <= min(x, R - x) + tol


@dataclass(frozen=True)
class Grid2D:
    """Uniform tensor grid over a bounding box with a boolean node mask.

    ``mask[j, i]`` covers node ``(x0 + i*hx, y0 + j*hy)``. For the slanted
    shapes the spacings are equal and the 45-degree edges pass exactly
    through nodes.
    """

    shape: GridShape
    x0: float
    y0: float
    nx: int
    ny: int
    hx: float
    hy: float
    mask: np.ndarray = field(repr=False)
    size: float = 0.0  # reference length R for the slanted shapes, else 0

    def __post_init__(self) -> None:
        m = np.array(self.mask, dtype=bool, copy=True)
        if m.shape != (self.ny + 1, self.nx + 1):
            raise ValueError("mask shape does not match node lattice")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)
        if min(self.nx, self.ny) < 2:
            raise ValueError("need at least 2 cells per axis")
        if self.hx <= 0 or self.hy <= 0:
            raise ValueError("spacings must be positive")

    @cached_property
    def xs(self) -> np.ndarray:
        x = self.x0 + np.arange(self.nx + 1) * self.hx
        x.setflags(write=False)
        return x

    @cached_property
    def ys(self) -> np.ndarray:
        y = self.y0 + np.arange(self.ny + 1) * self.hy
        y.setflags(write=False)
        return y

    def node_xy(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs, self.ys)

    @property
    def mask_area(self) -> float:
        """Covered area measured as (masked node count) * hx * hy."""
        return float(self.mask.sum()) * self.hx * self.hy


@dataclass(frozen=True)
class ScalarField2D:
    """Nodal values on a Grid2D; meaningful (and finite) on masked nodes only."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != self.grid.mask.shape:
            raise ValueError("values shape does not match grid nodes")
        if not np.all(np.isfinite(v[self.grid.mask])):
            raise ValueError("field values must be finite on masked nodes")
        v[~self.grid.mask] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "ScalarField2D":
        return ScalarField2D(self.grid, values)


def make_triangle_grid(R: float, n: int) -> Grid2D:
    """Half-triangle with base [0, R] on y=0 and apex (R/2, R/2).

    n is the cell count along the base; it must be even so the apex row is a
    node row and the slanted edges run node-to-node.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if n < 8:
        raise ValueError("need n >= 8 for usable stencils")
    if n % 2:
        raise ValueError("n must be even so the slanted edges are node-aligned")
    h = R / n
    i = np.arange(n + 1)
    j = np.arange(n // 2 + 1)
    X, Y = np.meshgrid(i * h, j * h)
    tol = _EDGE_TOL * R
    mask = (Y <= X + tol) & (X <= R - Y + tol)
    return Grid2D(GridShape.TRIANGLE_T_PLUS, 0.0, 0.0, n, n // 2, h, h, mask, size=R)


def make_diamond_grid(R: float, n: int) -> Grid2D:
    """Diamond {0 <= x <= R, |y| <= min(x, R-x)} on a square lattice."""
    if R <= 0:
        raise ValueError("R must be positive")
    if n < 8:
        raise ValueError("need n >= 8 for usable stencils")
    if n % 2:
        raise ValueError("n must be even so the slanted edges are node-aligned")
    h = R / n
    i = np.arange(n + 1)
    j = np.arange(n + 1)
    X, Y = np.meshgrid(i * h, -R / 2 + j * h)
    tol = _EDGE_TOL * R
    mask = np.abs(Y) <= np.minimum(X, R - X) + tol
    return Grid2D(GridShape.DIAMOND, 0.0, -R / 2, n, n, h, h, mask, size=R)


def make_rectangle_grid(
    x0: float, y0: float, width: float, height: float, nx: int, ny: int
) -> Grid2D:
    if width <= 0 or height <= 0:
        raise ValueError("rectangle extents must be positive")
    mask = np.ones((ny + 1, nx + 1), dtype=bool)
    return Grid2D(GridShape.RECTANGLE, x0, y0, nx, ny, width / nx, height / ny, mask)


def sample_2d(grid: Grid2D, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> ScalarField2D:
    X, Y = grid.node_xy()
    vals = np.asarray(fn(X, Y), dtype=np.float64)
    vals = np.where(grid.mask, vals, 0.0)
    return ScalarField2D(grid, vals)
