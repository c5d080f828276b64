"""Tests for the boundary-lift machinery: the averaging extension, the
explicit and sharp lifting ratios, and the two weighted-integral checks."""

from __future__ import annotations

import numpy as np
import pytest

from translayer import (
    DegenerateTraceError,
    Grid1D,
    LiftMethod,
    LiftReport,
    ScalarField1D,
    average_extension,
    derivative_field,
    estimate_zeta,
    h12_seminorm,
    hardy_check,
    hessian_terms_2d,
    lifting_ratio_explicit,
    make_diamond_grid,
    make_triangle_grid,
    sample,
    seminorm_comparison_check,
    smooth_profile,
)


def _smoothstep(n: int) -> ScalarField1D:
    grid = Grid1D(0.0, 1.0, n)
    return ScalarField1D(grid, np.tanh((grid.nodes - 0.5) / 0.08))


# ---------------------------------------------------------------------------
# averaging extension


def test_extension_of_constant_is_constant():
    g = ScalarField1D(Grid1D(0.0, 1.0, 64), np.full(65, 3.25))
    u = average_extension(g, make_triangle_grid(1.0, 64))
    assert np.allclose(u.values[u.grid.mask], 3.25, rtol=0.0, atol=1e-13)


def test_extension_reproduces_linear_trace():
    g = sample(Grid1D(0.0, 1.0, 128), lambda x: x)
    tri = make_triangle_grid(1.0, 128)
    u = average_extension(g, tri)
    X, _ = tri.node_xy()
    err = np.abs(u.values - X)[tri.mask].max()
    assert err <= 1e-12


def test_extension_of_square_trace():
    # the window average of t^2 over [x - y, x + y] is x^2 + y^2/3, and the
    # interpolant reproduces parabolas, so only accumulated rounding remains
    g = sample(Grid1D(0.0, 1.0, 128), lambda x: x * x)
    tri = make_triangle_grid(1.0, 128)
    u = average_extension(g, tri)
    X, Y = tri.node_xy()
    err = np.abs(u.values - (X**2 + Y**2 / 3.0))[tri.mask].max()
    assert err <= 1e-10


def test_extension_is_linear_in_the_trace(rng):
    grid = Grid1D(0.0, 1.0, 96)
    tri = make_triangle_grid(1.0, 96)
    g1 = smooth_profile(grid, rng)
    g2 = smooth_profile(grid, rng)
    combo = ScalarField1D(grid, 2.0 * g1.values - 3.0 * g2.values)
    lhs = average_extension(combo, tri).values
    rhs = 2.0 * average_extension(g1, tri).values - 3.0 * average_extension(g2, tri).values
    assert np.allclose(lhs[tri.mask], rhs[tri.mask], rtol=0.0, atol=1e-12)


def test_extension_even_in_y_on_diamond(rng):
    # rows at +/- y use the same window |y|, so the field is even bit for bit
    dia = make_diamond_grid(1.0, 64)
    g = smooth_profile(Grid1D(0.0, 1.0, 64), rng)
    u = average_extension(g, dia)
    w = np.where(dia.mask, u.values, 0.0)
    assert np.array_equal(w, np.flipud(w))


def test_extension_rejects_mismatched_window():
    g = _smoothstep(64)
    with pytest.raises(ValueError, match="does not match"):
        average_extension(g, make_triangle_grid(2.0, 64))


def test_extension_rejects_rectangle_grid():
    from translayer import make_rectangle_grid

    g = _smoothstep(64)
    with pytest.raises(ValueError, match="triangle or diamond"):
        average_extension(g, make_rectangle_grid(0.0, 0.0, 1.0, 1.0, 64, 64))


# ---------------------------------------------------------------------------
# lifting ratios


def test_explicit_ratio_of_smoothstep():
    rep = lifting_ratio_explicit(_smoothstep(256))
    assert rep.method is LiftMethod.EXPLICIT_AVERAGE
    assert 0.105 <= rep.ratio <= 0.4575
    finer = lifting_ratio_explicit(_smoothstep(512))
    assert abs(finer.ratio - rep.ratio) <= 1e-2 * rep.ratio


def test_per_derivative_shares_of_the_averaging_lift(rng):
    # each Hessian component of the lift is controlled by its own fraction of
    # the slope seminorm: 1/4 for the xx part, 1/16 for each of the others
    tol = 0.03
    tri = make_triangle_grid(1.0, 128)
    for _ in range(10):
        g = smooth_profile(Grid1D(0.0, 1.0, 128), rng)
        den = h12_seminorm(derivative_field(g))
        t = hessian_terms_2d(average_extension(g, tri))
        assert t.xx <= (0.25 + tol) * den
        assert t.xy <= (0.0625 + tol) * den
        assert t.yy <= (0.0625 + tol) * den


def test_sharp_ratio_below_explicit_and_above_floor(rng):
    tri = make_triangle_grid(1.0, 128)
    for _ in range(10):
        g = smooth_profile(Grid1D(0.0, 1.0, 128), rng)
        explicit = lifting_ratio_explicit(g)
        sharp = estimate_zeta(g, tri)
        assert sharp.method is LiftMethod.QUADRATIC_MINIMUM
        assert sharp.ratio <= explicit.ratio + 1e-9
        assert sharp.ratio >= 0.125 - 0.03


def test_sharp_ratio_stable_under_refinement():
    coarse = estimate_zeta(_smoothstep(128), make_triangle_grid(1.0, 128))
    fine = estimate_zeta(_smoothstep(256), make_triangle_grid(1.0, 256))
    assert abs(fine.ratio - coarse.ratio) <= 2e-2 * coarse.ratio


def test_affine_trace_is_degenerate():
    g = sample(Grid1D(0.0, 1.0, 128), lambda x: 2.0 * x + 1.0)
    with pytest.raises(DegenerateTraceError):
        lifting_ratio_explicit(g)
    with pytest.raises(DegenerateTraceError):
        estimate_zeta(g, make_triangle_grid(1.0, 128))


def test_sharp_ratio_input_validation():
    g = _smoothstep(128)
    with pytest.raises(ValueError, match="triangle"):
        estimate_zeta(g, make_diamond_grid(1.0, 128))
    with pytest.raises(ValueError, match="cells"):
        estimate_zeta(g, make_triangle_grid(1.0, 64))
    with pytest.raises(ValueError, match="window length"):
        estimate_zeta(_smoothstep(128), make_triangle_grid(2.0, 128))


def test_lift_report_validation():
    with pytest.raises(ValueError, match="denominator"):
        LiftReport(1.0, 0.0, 1.0, LiftMethod.EXPLICIT_AVERAGE)
    with pytest.raises(ValueError, match="ratio"):
        LiftReport(1.0, 2.0, 0.7, LiftMethod.EXPLICIT_AVERAGE)


# ---------------------------------------------------------------------------
# weighted-integral comparison (Hardy form)


def test_hardy_exact_linear_case():
    # u(y) = y on (0, 1) with r = 2: both sides have constant integrands, so
    # the trapezoid sums and the closed-form first cell are exact: 1/2 vs 1
    u = sample(Grid1D(0.0, 1.0, 200), lambda x: x)
    chk = hardy_check(u, 2.0)
    assert abs(chk.lhs - 0.5) <= 1e-12
    assert abs(chk.rhs - 1.0) <= 1e-12
    assert chk.passed


def test_hardy_zero_field():
    u = ScalarField1D(Grid1D(0.0, 1.0, 64), np.zeros(65))
    chk = hardy_check(u, 1.5)
    assert chk.lhs == 0.0
    assert chk.rhs == 0.0
    assert chk.passed


def test_hardy_random_fields(rng):
    for _ in range(50):
        span = rng.uniform(0.5, 2.0)
        lo = rng.uniform(-1.0, 1.0)
        grid = Grid1D(lo, lo + span, 256)
        u = smooth_profile(grid, rng, nonneg=True, zero_at_origin=True)
        r = rng.uniform(1.3, 3.0)
        assert hardy_check(u, r, slack=1e-3).passed


def test_hardy_input_validation():
    u = sample(Grid1D(0.0, 1.0, 64), lambda x: x)
    with pytest.raises(ValueError, match="r > 1"):
        hardy_check(u, 1.0)
    neg = ScalarField1D(Grid1D(0.0, 1.0, 64), np.linspace(-0.1, 1.0, 65))
    with pytest.raises(ValueError, match="nonnegative"):
        hardy_check(neg, 2.0)


# ---------------------------------------------------------------------------
# three-halves vs half-order seminorm comparison


def test_seminorm_comparison_linear_is_tight_zero():
    u = sample(Grid1D(0.0, 1.0, 64), lambda x: 3.0 * x - 1.0)
    chk = seminorm_comparison_check(u)
    assert chk.h32 == 0.0
    assert chk.bound == 0.0
    assert chk.passed


def test_seminorm_comparison_square():
    u = sample(Grid1D(0.0, 1.0, 256), lambda x: x * x)
    chk = seminorm_comparison_check(u)
    assert abs(chk.h32 - 0.25) <= 0.05
    assert abs(chk.bound - 0.5) <= 0.1
    assert chk.passed


def test_seminorm_comparison_random_fields(rng):
    for _ in range(50):
        u = smooth_profile(Grid1D(0.0, 1.0, 256), rng)
        assert seminorm_comparison_check(u).passed


def test_seminorm_comparison_rejects_odd_cells():
    u = sample(Grid1D(0.0, 1.0, 255), lambda x: x * x)
    with pytest.raises(ValueError, match="even"):
        seminorm_comparison_check(u)
