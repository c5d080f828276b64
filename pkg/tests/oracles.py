"""Reference implementations of every discrete energy, coded independently.

These are slow, loop-based, fsum-reduced versions of the exact same discrete
definitions the package kernels implement. They exist so the vectorized
kernels can be checked against an implementation with no shared code: plain
Python loops, explicit stencil tables, math.fsum accumulation.

Written (and kept) deliberately naive. Do not "optimize" them.
"""

from __future__ import annotations

from math import fsum

import numpy as np

# ---------------------------------------------------------------- 1-D pieces


def oracle_trapezoid(h: float, vals) -> float:
    n = len(vals) - 1
    return fsum(
        (0.5 if i in (0, n) else 1.0) * h * float(vals[i]) for i in range(n + 1)
    )


def oracle_second_derivative(h: float, f, i: int) -> float:
    n = len(f) - 1
    if 0 < i < n:
        return (f[i - 1] - 2.0 * f[i] + f[i + 1]) / h**2
    if i == 0:
        return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    return (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / h**2


def oracle_first_derivative(h: float, f, i: int) -> float:
    n = len(f) - 1
    if 0 < i < n:
        return (f[i + 1] - f[i - 1]) / (2.0 * h)
    if i == 0:
        return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    return (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * h)


def oracle_deriv_field(h: float, f) -> list[float]:
    return [oracle_first_derivative(h, f, i) for i in range(len(f))]


def oracle_bending(h: float, f) -> float:
    n = len(f) - 1
    terms = []
    for i in range(n + 1):
        w = 0.5 * h if i in (0, n) else h
        terms.append(w * oracle_second_derivative(h, f, i) ** 2)
    return fsum(terms)


def oracle_potential(h: float, f, well) -> float:
    n = len(f) - 1
    terms = []
    for i in range(n + 1):
        w = 0.5 * h if i in (0, n) else h
        terms.append(w * float(well.eval(float(f[i]))))
    return fsum(terms)


def oracle_h12(h: float, g) -> float:
    """Cell-midpoint double sum + slope diagonal, all in explicit loops."""
    n = len(g) - 1
    mids = [(g[i] + g[i + 1]) / 2.0 for i in range(n)]
    terms = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            terms.append((mids[i] - mids[j]) ** 2 / float(i - j) ** 2)
    diag = [(g[i + 1] - g[i]) ** 2 for i in range(n)]
    return fsum(terms) + fsum(diag)


def oracle_h12_fullline(h: float, lo: float, hi: float, g) -> float:
    """Window seminorm of the derivative field plus the exact constant-outside
    tails; the two boundary-node tail terms are zero by the admissibility
    requirement (singular kernel times required-zero derivative)."""
    u = oracle_deriv_field(h, g)
    n = len(g) - 1
    xs = [lo + i * h for i in range(n + 1)]
    tail_terms = []
    for i in range(1, n):
        w = h  # interior trapezoid weight; the half-weighted ends are dropped
        kern = 1.0 / (hi - xs[i]) + 1.0 / (xs[i] - lo)
        tail_terms.append(w * 2.0 * u[i] ** 2 * kern)
    return oracle_h12(h, u) + fsum(tail_terms)


def oracle_h32(h: float, u) -> float:
    """Even-index-sum midpoint double sum with diamond-lattice weights."""
    n = len(u) - 1
    wt = lambda i: 0.5 if i in (0, n) else 1.0
    terms = []
    for i in range(n + 1):
        for j in range(n + 1):
            if (i + j) % 2:
                continue
            w = 2.0 * h * h * wt(i) * wt(j)
            if i == j:
                f = oracle_second_derivative(h, u, i) ** 2 / 16.0
            else:
                m = (i + j) // 2
                f = (u[i] - 2.0 * u[m] + u[j]) ** 2 / (h * (i - j)) ** 4
            terms.append(w * f)
    return fsum(terms)


# ---------------------------------------------------------------- 2-D pieces


def _line_second(mask_ok, vals, k: int, h: float):
    """Second derivative along one line of a masked lattice, or None."""
    if mask_ok(k - 1) and mask_ok(k + 1):
        return (vals(k - 1) - 2.0 * vals(k) + vals(k + 1)) / h**2
    for d in (1, -1):
        if all(mask_ok(k + d * s) for s in range(4)):
            return (
                2.0 * vals(k) - 5.0 * vals(k + d) + 4.0 * vals(k + 2 * d) - vals(k + 3 * d)
            ) / h**2
    return None


_FIRST_STENCILS = {
    "C": ([-1, 0, 1], [-0.5, 0.0, 0.5]),
    "F": ([0, 1, 2], [-1.5, 2.0, -0.5]),
    "B": ([0, -1, -2], [1.5, -2.0, 0.5]),
}
_MIXED_ORDER = [
    ("C", "C"), ("C", "F"), ("C", "B"), ("F", "C"), ("B", "C"),
    ("F", "F"), ("F", "B"), ("B", "F"), ("B", "B"),
]


def _mixed_derivative(mask, u, j: int, i: int, hx: float, hy: float):
    ny, nx = mask.shape
    ok = lambda jj, ii: 0 <= jj < ny and 0 <= ii < nx and mask[jj, ii]
    for sy, sx in _MIXED_ORDER:
        offx, cx = _FIRST_STENCILS[sx]
        offy, cy = _FIRST_STENCILS[sy]
        if all(ok(j + oy, i + ox) for oy in offy for ox in offx):
            total = 0.0
            for oy, cyv in zip(offy, cy):
                for ox, cxv in zip(offx, cx):
                    total += cyv * cxv * u[j + oy, i + ox]
            return total / (hx * hy)
    return None


def oracle_hessian_2d(mask, u, hx: float, hy: float) -> float:
    """Sum over masked nodes of (uxx^2 + 2 uxy^2 + uyy^2) * w, product
    trapezoid weights; nodes lacking any full stencil contribute nothing."""
    ny, nx = mask.shape
    terms = []
    for j in range(ny):
        for i in range(nx):
            if not mask[j, i]:
                continue
            okx = lambda k: 0 <= k < nx and mask[j, k]
            oky = lambda k: 0 <= k < ny and mask[k, i]
            uxx = _line_second(okx, lambda k: u[j, k], i, hx)
            uyy = _line_second(oky, lambda k: u[k, i], j, hy)
            uxy = _mixed_derivative(mask, u, j, i, hx, hy)
            if uxx is None or uyy is None or uxy is None:
                continue
            wi = 1.0 if (okx(i - 1) and okx(i + 1)) else 0.5
            wj = 1.0 if (oky(j - 1) and oky(j + 1)) else 0.5
            terms.append(wi * wj * hx * hy * (uxx**2 + 2.0 * uxy**2 + uyy**2))
    return fsum(terms)


def oracle_potential_2d(mask, u, hx: float, hy: float, well) -> float:
    ny, nx = mask.shape
    terms = []
    for j in range(ny):
        for i in range(nx):
            if not mask[j, i]:
                continue
            okx = lambda k: 0 <= k < nx and mask[j, k]
            oky = lambda k: 0 <= k < ny and mask[k, i]
            wi = 1.0 if (okx(i - 1) and okx(i + 1)) else 0.5
            wj = 1.0 if (oky(j - 1) and oky(j + 1)) else 0.5
            terms.append(wi * wj * hx * hy * float(well.eval(float(u[j, i]))))
    return fsum(terms)
