//! Measurements on computed fields: Holder seminorm and sharp-constant
//! estimation, symmetry and shape diagnostics, singular-exponent fitting,
//! the extremal change of variables, and the Clarkson-type stability
//! inequality.

pub mod checks;
pub mod hull;
pub mod singular;
pub mod transform;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::energy::{physical_dirichlet_norm, EnergyError, EnergyParams};
use crate::field::{node_distance, ConstraintSet, FieldError, Node, ScalarField};

pub use checks::{
    check_cylindrical_symmetry, check_midplane_gradient_sign, check_nonvanishing_gradient,
    check_pointwise_bounds, check_quasiconcavity, check_reflection_antisymmetry,
    morrey_estimate_gap, BoundsReport, EnergyGapReport, GradientFloorReport, LevelDeficit,
    MidplaneReport, QuasiconcavityReport,
};
pub use hull::{convex_hull, hull_contains};
pub use singular::{
    dirac_mass_from_gamma, dirac_mass_from_normalization, fit_singular_exponent, SingularFit,
};
pub use transform::{check_stability, transform_extremal, StabilityReport, TransformedExtremal};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("operation requires a 2D field")]
    NotTwoDimensional,
    #[error("field has zero Dirichlet norm")]
    ZeroDirichletNorm,
    #[error("superlevel set at level {level} is empty")]
    EmptyLevelSet { level: f64 },
    #[error("level {level} must lie in (0, 1)")]
    BadLevel { level: f64 },
    #[error("nonpositive difference at radius {radius:.6e}: field is not locally maximal at the center")]
    NonpositiveDifference { radius: f64 },
    #[error("no admissible fit radii: largest usable radius {rmax:.6e} is below 2h = {min:.6e}")]
    RadiiOutOfRange { rmax: f64, min: f64 },
    #[error("center node is not on the grid")]
    BadCenter,
    #[error("field is constant; Holder argmax is undefined")]
    DegenerateArgmax,
    #[error("transform parameters degenerate: {0}")]
    BadTransform(&'static str),
    #[error("mapped extremal does not cover the requested grid (point maps outside the canonical domain)")]
    CoverageInsufficient,
}

/// Pair-scan strategy for the Holder seminorm.
///
/// `Exact` visits every distinct node pair. `Sampled` visits a seeded
/// random subset plus every pair involving a constraint node. `Auto`
/// picks `Exact` for grids up to 81 nodes per axis and `Sampled` with
/// 10^6 pairs beyond that.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeminormMode {
    Exact,
    Sampled { pairs: usize, seed: u64 },
    Auto { seed: u64 },
}

impl SeminormMode {
    fn resolve(self, nodes_per_axis: usize) -> SeminormMode {
        match self {
            SeminormMode::Auto { seed } => {
                if nodes_per_axis <= 81 {
                    SeminormMode::Exact
                } else {
                    SeminormMode::Sampled {
                        pairs: 1_000_000,
                        seed,
                    }
                }
            }
            other => other,
        }
    }
}

/// Holder seminorm measurement: the maximal ratio
/// `|u(x) - u(y)| / |x - y|^(1 - n/p)` over scanned node pairs, its
/// argmax, the ratio at the constraint pair, and the induced sharp
/// constant estimate `seminorm / (h^(n-p) E)^(1/p)`.
///
/// A constant field is degenerate: seminorm 0, no argmax, estimate 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub seminorm: f64,
    pub argmax_pair: Option<(Node, Node)>,
    pub ratio_at_constraints: f64,
    pub c_star_estimate: f64,
    pub degenerate: bool,
}

struct PairScan<'a> {
    field: &'a ScalarField,
    sigma: f64,
    best: Option<(f64, Node, Node)>,
}

impl<'a> PairScan<'a> {
    fn new(field: &'a ScalarField, sigma: f64) -> Self {
        PairScan {
            field,
            sigma,
            best: None,
        }
    }

    fn ratio(&self, a: Node, b: Node) -> f64 {
        let d = (self.field.get(a) - self.field.get(b)).abs();
        d / node_distance(self.field.grid(), a, b).powf(self.sigma)
    }

    /// Ties broken toward the lexicographically smallest ordered pair.
    fn consider(&mut self, a: Node, b: Node) {
        let ratio = self.ratio(a, b);
        let pair = if a <= b { (a, b) } else { (b, a) };
        let better = match &self.best {
            None => true,
            Some((r, ba, bb)) => ratio > *r || (ratio == *r && pair < (*ba, *bb)),
        };
        if better {
            self.best = Some((ratio, pair.0, pair.1));
        }
    }
}

/// Scans node pairs for the maximal Holder ratio. Exact mode visits all
/// pairs in lexicographic order; sampled mode visits a seeded subset plus
/// all pairs involving constraint nodes, so the constraint pair is never
/// missed.
pub fn holder_seminorm(
    field: &ScalarField,
    params: &EnergyParams,
    constraints: &ConstraintSet,
    mode: SeminormMode,
) -> Result<HolderReport, AnalysisError> {
    let grid = field.grid();
    params.validate(grid.dim())?;
    field.check_finite()?;
    let sigma = 1.0 - grid.dim() as f64 / params.p;

    let live: Vec<Node> = grid.live_nodes().collect();
    let mut scan = PairScan::new(field, sigma);
    match mode.resolve(grid.nodes_per_axis()) {
        SeminormMode::Exact => {
            for (idx, &a) in live.iter().enumerate() {
                for &b in &live[idx + 1..] {
                    scan.consider(a, b);
                }
            }
        }
        SeminormMode::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut drawn = 0usize;
            while drawn < pairs {
                let a = live[rng.random_range(0..live.len())];
                let b = live[rng.random_range(0..live.len())];
                if a != b {
                    scan.consider(a, b);
                    drawn += 1;
                }
            }
            for &(cnode, _) in constraints.entries() {
                for &other in &live {
                    if other != cnode {
                        scan.consider(cnode, other);
                    }
                }
            }
        }
        SeminormMode::Auto { .. } => unreachable!("resolved above"),
    }

    let mut ratio_at_constraints = 0.0f64;
    let entries = constraints.entries();
    for (idx, &(a, _)) in entries.iter().enumerate() {
        for &(b, _) in &entries[idx + 1..] {
            ratio_at_constraints = ratio_at_constraints.max(scan.ratio(a, b));
        }
    }

    let (seminorm, argmax_pair) = match scan.best {
        Some((r, a, b)) if r > 0.0 => (r, Some((a, b))),
        _ => (0.0, None),
    };
    let norm = physical_dirichlet_norm(field, params)?;
    let degenerate = argmax_pair.is_none() || norm == 0.0;
    let c_star_estimate = if norm > 0.0 { seminorm / norm } else { 0.0 };
    Ok(HolderReport {
        seminorm,
        argmax_pair,
        ratio_at_constraints,
        c_star_estimate,
        degenerate,
    })
}

/// `holder_seminorm / physical_dirichlet_norm`: a discretization-level
/// witness for the sharp constant. Errors on a zero Dirichlet norm.
pub fn sharp_constant_estimate(
    field: &ScalarField,
    params: &EnergyParams,
    constraints: &ConstraintSet,
    mode: SeminormMode,
) -> Result<f64, AnalysisError> {
    let report = holder_seminorm(field, params, constraints, mode)?;
    if report.degenerate {
        return Err(AnalysisError::ZeroDirichletNorm);
    }
    Ok(report.c_star_estimate)
}

/// One named residual with its tolerance verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// The qualitative checks bundled with pass/fail verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub entries: Vec<ResidualEntry>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Tolerances for [`property_report`]. Symmetry residuals are measured
/// relative to the seminorm; the others are absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerances {
    pub symmetry_rel: f64,
    pub bounds: f64,
    pub hull_deficit: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            symmetry_rel: 1e-3,
            bounds: 1e-6,
            hull_deficit: 1e-3,
        }
    }
}

/// Runs the five qualitative checks on a canonical 2D field and bundles
/// the residuals with verdicts.
pub fn property_report(
    field: &ScalarField,
    params: &EnergyParams,
    constraints: &ConstraintSet,
    levels: &[f64],
    mode: SeminormMode,
    tol: CheckTolerances,
) -> Result<PropertyReport, AnalysisError> {
    let holder = holder_seminorm(field, params, constraints, mode)?;
    let scale = holder.seminorm;

    let antisymmetry = check_reflection_antisymmetry(field)?;
    let mirror = check_cylindrical_symmetry(field)?;
    let bounds = check_pointwise_bounds(field, constraints)?;
    let hull = check_quasiconcavity(field, levels)?;
    let midplane = check_midplane_gradient_sign(field)?;

    let entries = vec![
        ResidualEntry {
            name: "antisymmetry",
            residual: antisymmetry,
            tolerance: tol.symmetry_rel * scale,
            pass: antisymmetry <= tol.symmetry_rel * scale,
        },
        ResidualEntry {
            name: "cylindrical_symmetry",
            residual: mirror,
            tolerance: tol.symmetry_rel * scale,
            pass: mirror <= tol.symmetry_rel * scale,
        },
        ResidualEntry {
            name: "bounds",
            residual: bounds.max_violation(),
            tolerance: tol.bounds,
            pass: bounds.max_violation() <= tol.bounds,
        },
        ResidualEntry {
            name: "quasiconcavity",
            residual: hull.worst_deficit(),
            tolerance: tol.hull_deficit,
            pass: hull.worst_deficit() <= tol.hull_deficit,
        },
        ResidualEntry {
            name: "midplane_gradient_sign",
            residual: midplane.worst_violation,
            tolerance: 0.0,
            pass: midplane.violations == 0,
        },
    ];
    Ok(PropertyReport { entries })
}
