"""Transition-layer energies: 1-D profile constants, boundary lifting
ratios, and discrete sweeps that expose the O(1) minimum-energy plateau in
the critical coupling regime.
"""

from __future__ import annotations

from .constants import (
    ConstantEstimate,
    MatchSide,
    characterize,
    compute_c_delta,
    compute_c_over,
    compute_c_under,
    compute_m,
    compute_sigma,
    converge_window,
    cubic_match,
    extend_profile,
    scale_optimal_value,
)
from .energy import (
    EnergyBreakdown,
    EpsLambda,
    FullEnergy2D,
    HessianTerms,
    TraceEnergy1D,
    WallEnergy1D,
    bending_energy,
    boundary_trace,
    build_mask_stencils,
    derivative_field,
    f_eps,
    full_energy_2d,
    g_eps,
    h12_seminorm,
    h12_seminorm_fullline,
    h32_seminorm,
    hessian_energy_2d,
    hessian_terms_2d,
    mask_quadrature,
    potential_integral,
    potential_integral_2d,
)
from .errors import (
    ConfigError,
    DegenerateTraceError,
    NonFiniteEnergyError,
    SolveConvergenceError,
    TranslayerError,
)
from .grid import (
    Grid1D,
    Grid2D,
    GridShape,
    ScalarField1D,
    ScalarField2D,
    make_diamond_grid,
    make_grid_1d,
    make_rectangle_grid,
    make_triangle_grid,
    sample,
    sample_2d,
)
from .lifting import (
    HardyCheck,
    LiftMethod,
    LiftReport,
    SeminormComparison,
    average_extension,
    estimate_zeta,
    hardy_check,
    lifting_ratio_explicit,
    seminorm_comparison_check,
)
from .optimize import Constraint, ConstraintKind, OptimizeResult, gradient, minimize
from .potentials import DoubleWell, HypothesisReport, check_hypotheses, quartic_well
from .randomfields import smooth_profile, transition_profile
from .reduction import tree_sum
from .scaling import (
    InitKind,
    SweepConfig,
    SweepRecord,
    boundary_layer_ansatz_2d,
    boundary_mass_constraint,
    interior_mass_constraint,
    plateau_change,
    profile_ansatz_1d,
    sweep_f1d,
    sweep_full2d,
    sweep_g1d,
    transition_energy_fraction,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Constraint",
    "ConstraintKind",
    "ConstantEstimate",
    "DegenerateTraceError",
    "DoubleWell",
    "EnergyBreakdown",
    "EpsLambda",
    "FullEnergy2D",
    "Grid1D",
    "Grid2D",
    "GridShape",
    "HardyCheck",
    "HessianTerms",
    "HypothesisReport",
    "InitKind",
    "LiftMethod",
    "LiftReport",
    "MatchSide",
    "NonFiniteEnergyError",
    "OptimizeResult",
    "ScalarField1D",
    "ScalarField2D",
    "SeminormComparison",
    "SolveConvergenceError",
    "SweepConfig",
    "SweepRecord",
    "TraceEnergy1D",
    "TranslayerError",
    "WallEnergy1D",
    "average_extension",
    "bending_energy",
    "boundary_layer_ansatz_2d",
    "boundary_mass_constraint",
    "boundary_trace",
    "build_mask_stencils",
    "characterize",
    "check_hypotheses",
    "compute_c_delta",
    "compute_c_over",
    "compute_c_under",
    "compute_m",
    "compute_sigma",
    "converge_window",
    "cubic_match",
    "derivative_field",
    "estimate_zeta",
    "extend_profile",
    "f_eps",
    "full_energy_2d",
    "g_eps",
    "gradient",
    "h12_seminorm",
    "h12_seminorm_fullline",
    "h32_seminorm",
    "hardy_check",
    "hessian_energy_2d",
    "hessian_terms_2d",
    "interior_mass_constraint",
    "lifting_ratio_explicit",
    "make_diamond_grid",
    "make_grid_1d",
    "make_rectangle_grid",
    "make_triangle_grid",
    "mask_quadrature",
    "minimize",
    "plateau_change",
    "potential_integral",
    "potential_integral_2d",
    "profile_ansatz_1d",
    "quartic_well",
    "sample",
    "sample_2d",
    "scale_optimal_value",
    "seminorm_comparison_check",
    "smooth_profile",
    "sweep_f1d",
    "sweep_full2d",
    "sweep_g1d",
    "transition_energy_fraction",
    "transition_profile",
    "tree_sum",
]
