import numpy as np
import pytest

from translayer import (
    Constraint,
    EnergyBreakdown,
    NonFiniteEnergyError,
    WallEnergy1D,
    gradient,
    make_grid_1d,
    minimize,
    quartic_well,
)


class _Quadratic:
    """sum(x^2) with analytic gradient; no hessian attribute on purpose."""

    def __init__(self, n: int) -> None:
        self.n_dof = n

    def value(self, x):
        return float(np.dot(x, x))

    def gradient(self, x):
        return 2.0 * x

    def breakdown(self, x):
        return EnergyBreakdown(potential=self.value(x))

    def field_from(self, x):
        return x


def _wall_problem(n=128, R=4.0):
    grid = make_grid_1d(-R, R, n)
    well = quartic_well(-1.0, 1.0, 1.0)
    model = WallEnergy1D(grid, well)
    pins = Constraint.dirichlet([0, 1, n - 1, n], [-1.0, -1.0, 1.0, 1.0])
    return grid, model, pins


def test_gradient_zero_at_well_constant():
    grid, model, _ = _wall_problem()
    g = gradient(model, np.full(grid.n + 1, 1.0))
    assert np.all(g == 0.0)


def test_gradient_matches_directional_fd(rng):
    grid, model, _ = _wall_problem(n=64)
    x = np.tanh(grid.nodes) + 0.1 * rng.standard_normal(65)
    g = model.gradient(x)
    delta = 1e-6
    for _ in range(20):
        phi = rng.standard_normal(65)
        fd = (model.value(x + delta * phi) - model.value(x - delta * phi)) / (2 * delta)
        assert fd == pytest.approx(float(np.dot(g, phi)), rel=1e-6, abs=1e-10)


def test_gradient_projection_zeroes_frozen(rng):
    grid, model, pins = _wall_problem(n=64)
    x = rng.standard_normal(65)
    x[[0, 1, 63, 64]] = [-1.0, -1.0, 1.0, 1.0]
    g = gradient(model, x, [pins])
    assert np.all(g[[0, 1, 63, 64]] == 0.0)
    assert np.any(g[2:63] != 0.0)


def test_minimize_zero_iterations_at_optimum():
    grid, model, _ = _wall_problem()
    res = minimize(model, np.full(grid.n + 1, -1.0))
    assert res.converged
    assert res.iterations == 0
    assert res.energy == 0.0


def test_minimize_quadratic_toy():
    n = 40
    model = _Quadratic(n)
    x0 = np.linspace(1.0, 2.0, n)
    pin = Constraint.dirichlet([0], [3.0])
    res = minimize(model, x0.copy().astype(float), [pin], tol=1e-10)
    assert res.converged
    assert res.iterations <= n
    assert res.field[0] == 3.0
    assert np.max(np.abs(res.field[1:])) <= 1e-9


def test_minimize_descent_in_iteration_budget():
    """Energy after k accepted steps is non-increasing in k."""
    grid, model, pins = _wall_problem(n=96)
    x0 = np.linspace(-1.0, 1.0, 97)
    energies = []
    for k in range(1, 9):
        res = minimize(model, x0, [pins], max_iter=k)
        energies.append(res.energy)
    assert all(b <= a + 1e-15 for a, b in zip(energies, energies[1:]))


def test_minimize_multistart_consistency():
    grid, model, pins = _wall_problem(n=256, R=5.0)
    ramp = np.clip(grid.nodes / 5.0, -1.0, 1.0)
    tanh = np.tanh(2.0 * grid.nodes)
    e_ramp = minimize(model, ramp, [pins]).energy
    e_tanh = minimize(model, tanh, [pins]).energy
    assert e_ramp == pytest.approx(e_tanh, abs=1e-6)


def test_minimize_keeps_dirichlet_bits():
    grid, model, pins = _wall_problem()
    res = minimize(model, np.linspace(-1.0, 1.0, grid.n + 1), [pins])
    vals = res.field.values
    assert res.converged
    assert vals[0] == -1.0 and vals[1] == -1.0
    assert vals[-1] == 1.0 and vals[-2] == 1.0


def test_minimize_mass_average_drift():
    grid, model, _ = _wall_problem(n=128)
    w = grid.trapezoid_weights
    target = 0.2
    mass = Constraint.mass_average(w, target)
    x0 = np.linspace(-1.0, 1.0, 129)
    res = minimize(model, x0, [mass], max_iter=1000)
    got = float(np.dot(w, res.field.values)) / float(w.sum())
    assert abs(got - target) <= 1e-12


def test_minimize_gradient_contract():
    grid, model, pins = _wall_problem(n=128)
    tol = 1e-8
    res = minimize(model, np.tanh(grid.nodes), [pins], tol=tol)
    assert res.converged
    assert res.grad_norm <= tol
    g = gradient(model, res.field.values, [pins])
    assert float(np.max(np.abs(g))) <= 2 * tol


def test_minimize_deterministic_bits():
    grid, model, pins = _wall_problem(n=96)
    x0 = np.linspace(-1.0, 1.0, 97)
    a = minimize(model, x0, [pins])
    b = minimize(model, x0, [pins])
    assert np.array_equal(a.field.values, b.field.values)
    assert a.energy == b.energy


def test_minimize_nonfinite_start():
    grid, model, _ = _wall_problem(n=64)
    bad = np.full(65, np.nan)
    with pytest.raises(NonFiniteEnergyError):
        minimize(model, bad)


def test_constraint_validation():
    with pytest.raises(ValueError):
        Constraint.mass_average(np.zeros(5), 0.0)
    with pytest.raises(ValueError):
        Constraint.dirichlet([0, 1], [1.0])
    grid, model, _ = _wall_problem(n=16)
    with pytest.raises(ValueError):
        minimize(model, np.zeros(17), [Constraint.dirichlet([99], [0.0])])
    both = [Constraint.dirichlet([0], [0.0]), Constraint.dirichlet([0], [1.0])]
    with pytest.raises(ValueError):
        minimize(model, np.zeros(17), both)
    with pytest.raises(ValueError):
        minimize(model, np.zeros(17), [Constraint.mass_average(np.ones(5), 0.0)])
    with pytest.raises(ValueError):
        minimize(model, np.zeros(5))
