//! Numerical study of extremal functions for Morrey's inequality.
//!
//! The crate discretizes the p-Dirichlet energy on a uniform grid over
//! `[-l, l]^n` (n = 1 or 2, p > n), minimizes it by constrained gradient
//! descent, and analyzes the minimizers: Holder seminorm and sharp-constant
//! estimates, symmetry and shape diagnostics, the singular expansion at the
//! constraint points, and the finite chain constructions that underpin the
//! capacitary lower bounds.

pub mod analysis;
pub mod archive;
pub mod chain;
pub mod descent;
pub mod energy;
pub mod field;
pub mod oned;

pub use analysis::{
    check_cylindrical_symmetry, check_midplane_gradient_sign, check_nonvanishing_gradient,
    check_pointwise_bounds, check_quasiconcavity, check_reflection_antisymmetry, check_stability,
    convex_hull, dirac_mass_from_gamma, dirac_mass_from_normalization, fit_singular_exponent,
    holder_seminorm, hull_contains, morrey_estimate_gap, property_report, sharp_constant_estimate,
    transform_extremal, AnalysisError, BoundsReport, CheckTolerances, EnergyGapReport,
    GradientFloorReport, HolderReport, LevelDeficit, MidplaneReport, PropertyReport,
    QuasiconcavityReport, ResidualEntry, SeminormMode, SingularFit, StabilityReport,
    TransformedExtremal,
};
pub use archive::{load_field, save_field, ArchiveError, ArchiveHeader, FieldArchive};
pub use chain::{
    chain_equal_norm, chain_general_2d, chain_nd, chain_on_circle, finite_chain, theta,
    verify_chain, AngleParams, Chain, ChainError, ChainReport,
};
pub use descent::{
    adaptive_tau, default_initial_guess, descent_step, run_descent, DescentConfig, DescentError,
    DescentState,
};
pub use energy::{
    discrete_energy, energy_gradient, p_laplacian_residual, physical_dirichlet_norm, EnergyError,
    EnergyParams, GradientField,
};
pub use field::{
    make_grid, node_distance, ConstraintError, ConstraintSet, FieldError, Grid, GridError, Node,
    ScalarField,
};
pub use oned::{
    exact_extremal_1d, exact_sharp_constant_1d, extremal_1d_general, holder_ratio_integral_bound,
    OneDError,
};
