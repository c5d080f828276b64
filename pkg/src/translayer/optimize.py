"""Projected quasi-Newton descent for the energy models.

The minimizer is a limited-memory BFGS with an Armijo backtracking line
search, run in the tangent space of the active constraints:

* Dirichlet constraints pin listed degrees of freedom to given values; the
  pinned entries of every iterate equal those values bit for bit.
* Mass-average constraints fix a weighted average of the iterate; feasibility
  is re-imposed after every accepted step, so drift cannot accumulate.

The implementation is deliberately small and self-contained: the models
expose exact gradients, the problems are smooth, and keeping the whole
descent path in one place makes run-to-run determinism easy to guarantee.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import EnergyBreakdown
from .errors import NonFiniteEnergyError

logger = logging.getLogger(__name__)

_ARMIJO_C = 1e-4
_MAX_HALVINGS = 60


class ConstraintKind(Enum):
    DIRICHLET_NODES = "dirichlet_nodes"
    MASS_AVERAGE = "mass_average"


@dataclass(frozen=True)
class Constraint:
    """One linear constraint on the degrees of freedom."""

    kind: ConstraintKind
    indices: np.ndarray | None = None
    values: np.ndarray | None = None
    weights: np.ndarray | None = None
    target: float = 0.0

    @classmethod
    def dirichlet(cls, indices: Sequence[int], values: Sequence[float]) -> "Constraint":
        idx = np.asarray(indices, dtype=np.int64)
        val = np.asarray(values, dtype=np.float64)
        if idx.ndim != 1 or idx.shape != val.shape:
            raise ValueError("dirichlet indices and values must be 1-D and equal length")
        if idx.size == 0:
            raise ValueError("dirichlet constraint needs at least one node")
        if np.unique(idx).size != idx.size:
            raise ValueError("dirichlet indices must be unique")
        if not np.all(np.isfinite(val)):
            raise ValueError("dirichlet values must be finite")
        return cls(ConstraintKind.DIRICHLET_NODES, indices=idx, values=val)

    @classmethod
    def mass_average(cls, weights: Sequence[float], target: float) -> "Constraint":
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or not np.any(w != 0.0):
            raise ValueError("mass weights must be a finite, nonzero 1-D vector")
        if not np.isfinite(target):
            raise ValueError("mass target must be finite")
        return cls(ConstraintKind.MASS_AVERAGE, weights=w, target=float(target))


@dataclass(frozen=True)
class OptimizeResult:
    field: object
    energy: float
    breakdown: EnergyBreakdown
    grad_norm: float
    iterations: int
    converged: bool


class _Feasible:
    """Pinned values plus the affine mass equations, with projections."""

    def __init__(self, n: int, constraints: Sequence[Constraint]):
        self.free = np.ones(n, dtype=bool)
        pinned_idx: list[np.ndarray] = []
        pinned_val: list[np.ndarray] = []
        mass: list[Constraint] = []
        for c in constraints:
            if c.kind is ConstraintKind.DIRICHLET_NODES:
                if np.any(c.indices < 0) or np.any(c.indices >= n):
                    raise ValueError("dirichlet index out of range")
                if not self.free[c.indices].all():
                    raise ValueError("node pinned by more than one constraint")
                self.free[c.indices] = False
                pinned_idx.append(c.indices)
                pinned_val.append(c.values)
            elif c.kind is ConstraintKind.MASS_AVERAGE:
                if c.weights.size != n:
                    raise ValueError(
                        f"mass weights length {c.weights.size} != {n} degrees of freedom"
                    )
                mass.append(c)
            else:  # pragma: no cover - enum is closed
                raise ValueError(f"unknown constraint kind {c.kind}")
        self.pinned_idx = (
            np.concatenate(pinned_idx) if pinned_idx else np.empty(0, dtype=np.int64)
        )
        self.pinned_val = (
            np.concatenate(pinned_val) if pinned_val else np.empty(0)
        )
        self._a_free = None
        self._b = None
        if mass:
            rows = np.stack([c.weights[self.free] for c in mass])
            if np.any(np.all(rows == 0.0, axis=1)):
                raise ValueError("a mass constraint acts only on pinned nodes")
            gram = rows @ rows.T
            if np.linalg.matrix_rank(gram) < len(mass):
                raise ValueError("mass constraints are linearly dependent")
            self._a_free = rows
            self._gram = gram
            self._mass = mass

    @property
    def mass_rows(self) -> np.ndarray | None:
        return self._a_free

    def _targets(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(len(self._mass))
        for k, c in enumerate(self._mass):
            total = c.target * float(np.sum(c.weights))
            out[k] = total - float(np.dot(c.weights[~self.free], x[~self.free]))
        return out

    def impose(self, x: np.ndarray) -> np.ndarray:
        """Return the closest feasible point (pins exact, masses projected)."""
        x = np.array(x, dtype=np.float64, copy=True)
        x[self.pinned_idx] = self.pinned_val
        if self._a_free is not None:
            r = self._a_free @ x[self.free] - self._targets(x)
            x[self.free] -= self._a_free.T @ np.linalg.solve(self._gram, r)
        return x

    def tangent(self, v: np.ndarray) -> np.ndarray:
        """Project a vector onto the feasible directions."""
        v = np.array(v, dtype=np.float64, copy=True)
        v[~self.free] = 0.0
        if self._a_free is not None:
            r = self._a_free @ v[self.free]
            v[self.free] -= self._a_free.T @ np.linalg.solve(self._gram, r)
        return v


def gradient(model, x: np.ndarray, constraints: Sequence[Constraint] = ()) -> np.ndarray:
    """Constraint-projected gradient of a model at a point."""
    feas = _Feasible(np.asarray(x).size, constraints)
    return feas.tangent(np.asarray(model.gradient(np.asarray(x, dtype=np.float64))))


def minimize(
    model,
    x0: np.ndarray,
    constraints: Sequence[Constraint] = (),
    *,
    tol: float = 1e-8,
    max_iter: int = 2000,
    memory: int = 10,
) -> OptimizeResult:
    """Minimize a model with projected L-BFGS.

    Convergence is declared when the max-norm of the projected gradient falls
    to ``tol``. Raises :class:`NonFiniteEnergyError` if an accepted iterate
    (including the start point) has non-finite energy or gradient.
    """
    x = np.asarray(x0, dtype=np.float64)
    if x.ndim != 1 or x.size != model.n_dof:
        raise ValueError(f"expected {model.n_dof} degrees of freedom, got shape {x.shape}")
    feas = _Feasible(x.size, constraints)
    x = feas.impose(x)

    energy = float(model.value(x))
    if not np.isfinite(energy):
        raise NonFiniteEnergyError(0, "at the start point")
    grad = feas.tangent(model.gradient(x))
    if not np.all(np.isfinite(grad)):
        raise NonFiniteEnergyError(0, "gradient at the start point")

    pairs: deque[tuple[np.ndarray, np.ndarray]] = deque(maxlen=memory)
    iterations = 0
    gmax = float(np.max(np.abs(grad)))
    converged = gmax <= tol
    # Models exposing an exact Hessian get damped curvature steps (with the
    # quasi-Newton line-search loop as fallback); that is what pushes the
    # gradient to tol on the stiff bending problems, where secant directions
    # alone crawl.
    use_newton = hasattr(model, "hessian")
    stall = 0

    while not converged and iterations < max_iter:
        step = _newton_step(model, feas, x, energy, grad) if use_newton else None
        if step is None:
            direction = _lbfgs_direction(grad, pairs)
            slope = float(np.dot(direction, grad))
            if slope >= 0.0:
                pairs.clear()
                direction = -grad
                slope = -float(np.dot(grad, grad))
            step = _line_search(model, feas, x, energy, direction, slope, pairs)
            if step is None and pairs:
                # quasi-Newton direction failed; retry as steepest descent
                pairs.clear()
                direction = -grad
                slope = -float(np.dot(grad, grad))
                step = _line_search(model, feas, x, energy, direction, slope, pairs)
            if step is None:
                logger.warning(
                    "line search stalled after %d iterations (grad max %.3e)",
                    iterations,
                    gmax,
                )
                break

        x_new, e_new = step
        g_new = model.gradient(x_new)
        if not np.all(np.isfinite(g_new)):
            raise NonFiniteEnergyError(iterations + 1, "gradient")
        g_new = feas.tangent(g_new)

        s = x_new - x
        yv = g_new - grad
        sy = float(np.dot(s, yv))
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)):
            pairs.append((s, yv))

        gmax_new = float(np.max(np.abs(g_new)))
        no_progress = (
            gmax_new > 0.75 * gmax and energy - e_new <= 1e-15 * (1.0 + abs(energy))
        )
        stall = stall + 1 if no_progress else 0
        x, energy, grad, gmax = x_new, e_new, g_new, gmax_new
        iterations += 1
        converged = gmax <= tol
        if stall >= 3:
            logger.warning("descent stopped improving at grad max %.3e", gmax)
            break

    return OptimizeResult(
        field=model.field_from(x),
        energy=energy,
        breakdown=model.breakdown(x),
        grad_norm=float(np.max(np.abs(grad))),
        iterations=iterations,
        converged=converged,
    )


def _newton_step(model, feas, x, energy, grad):
    """One damped exact-Hessian step; None when not usable here.

    The trial must not increase the energy (ties allowed: near the floating
    point floor a correct step may change the value by less than one ulp).
    """
    hess = model.hessian(x)
    free = feas.free
    gf = grad[free]
    if sp.issparse(hess):
        hff = hess[free][:, free]
    else:
        hff = hess[np.ix_(free, free)]

    try:
        if feas.mass_rows is not None:
            a = feas.mass_rows
            k = a.shape[0]
            rhs = np.concatenate([-gf, np.zeros(k)])
            if sp.issparse(hff):
                kkt = sp.bmat([[hff, sp.csc_matrix(a.T)], [sp.csc_matrix(a), None]])
                sol = spla.splu(kkt.tocsc()).solve(rhs)
            else:
                kkt = np.block([[hff, a.T], [a, np.zeros((k, k))]])
                sol = np.linalg.solve(kkt, rhs)
            df = sol[: gf.size]
        elif sp.issparse(hff):
            df = spla.splu(hff.tocsc()).solve(-gf)
        else:
            df = np.linalg.solve(hff, -gf)
    except (np.linalg.LinAlgError, RuntimeError):
        return None
    if not np.all(np.isfinite(df)):
        return None

    d = np.zeros_like(x)
    d[free] = df
    d = feas.tangent(d)
    slope = float(np.dot(d, grad))
    if slope >= 0.0:
        return None
    t = 1.0
    for _ in range(25):
        trial = feas.impose(x + t * d)
        e_trial = float(model.value(trial))
        need = _ARMIJO_C * t * slope
        if abs(need) <= 1e-15 * (1.0 + abs(energy)):
            ok = e_trial <= energy  # below the resolvable decrease: no increase
        else:
            ok = e_trial <= energy + need
        if np.isfinite(e_trial) and ok:
            return trial, e_trial
        t *= 0.5
    return None


def _lbfgs_direction(grad: np.ndarray, pairs) -> np.ndarray:
    """Two-loop recursion; scales the seed Hessian from the newest pair."""
    q = -grad.copy()
    if not pairs:
        return q
    alphas = []
    rhos = []
    for s, y in reversed(pairs):
        rho = 1.0 / float(np.dot(y, s))
        alpha = rho * float(np.dot(s, q))
        q -= alpha * y
        alphas.append(alpha)
        rhos.append(rho)
    s_last, y_last = pairs[-1]
    q *= float(np.dot(s_last, y_last)) / float(np.dot(y_last, y_last))
    for (s, y), alpha, rho in zip(pairs, reversed(alphas), reversed(rhos)):
        beta = rho * float(np.dot(y, q))
        q += (alpha - beta) * s
    return q


def _line_search(model, feas, x, energy, direction, slope, pairs):
    """Backtracking Armijo search; returns (feasible point, energy) or None.

    Trial points are projected onto the constraints *before* evaluation, so
    the accepted energy is the energy of the iterate actually kept and the
    sequence of accepted energies is strictly decreasing.
    """
    scale = float(np.linalg.norm(direction))
    if scale == 0.0:
        return None
    t = 1.0 if pairs else min(1.0, 1.0 / max(1.0, scale))
    floor = 1e-18 * max(1.0, float(np.max(np.abs(x))))
    for _ in range(_MAX_HALVINGS):
        if t * scale < floor:
            return None
        trial = feas.impose(x + t * direction)
        e_trial = float(model.value(trial))
        if np.isfinite(e_trial) and e_trial <= energy + _ARMIJO_C * t * slope:
            return trial, e_trial
        t *= 0.5
    return None
