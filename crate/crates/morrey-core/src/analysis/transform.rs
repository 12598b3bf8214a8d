//! The similarity change of variables turning the canonical extremal
//! (pins +1 at (0,1), -1 at (0,-1)) into the extremal with arbitrary pin
//! points and values, plus the Clarkson-type stability check built on it:
//!
//! `(C/2)^p ||Du - Dv||^p + [v]^p <= C^p ||Dv||^p`  for p > 2,
//!
//! with the exponent `p/(p-1)` variant for 1 < p <= 2 (necessarily n=1),
//! where `v` is the test field and `u` the extremal matching `v` at its
//! Hölder argmax.

use crate::analysis::{
    holder_seminorm, sharp_constant_estimate, AnalysisError, SeminormMode,
};
use crate::energy::{physical_dirichlet_norm, EnergyParams};
use crate::field::{ConstraintSet, FieldError, Grid, Node, ScalarField};
use crate::oned::extremal_1d_general;

/// Evaluator for `u(x) = h_d * v(T x) + h_s` with `h_d = (alpha-beta)/2`,
/// `h_s = (alpha+beta)/2`, and `T` the similarity sending `x0` to (0, 1)
/// and `y0` to (0, -1): `T x = (0,1) + (2/|y0-x0|) O (x - x0)` for the
/// rotation `O` mapping `(y0-x0)/|y0-x0|` to (0, -1).
///
/// Exact identity parameters short-circuit `T`, so the evaluator
/// reproduces the canonical field bitwise at nodes.
#[derive(Debug, Clone)]
pub struct TransformedExtremal {
    field: ScalarField,
    x0: [f64; 2],
    rot: [[f64; 2]; 2],
    scale: f64,
    half_diff: f64,
    half_sum: f64,
    identity: bool,
}

impl TransformedExtremal {
    /// Evaluates the transformed extremal; errors when the point's image
    /// under `T` leaves the canonical domain.
    pub fn evaluate(&self, point: [f64; 2]) -> Result<f64, FieldError> {
        if self.identity {
            return self.field.interpolate(&point);
        }
        let w = [point[0] - self.x0[0], point[1] - self.x0[1]];
        let rx = self.scale * (self.rot[0][0] * w[0] + self.rot[0][1] * w[1]);
        let ry = self.scale * (self.rot[1][0] * w[0] + self.rot[1][1] * w[1]);
        let v = self.field.interpolate(&[rx, 1.0 + ry])?;
        Ok(self.half_diff * v + self.half_sum)
    }

    /// Samples the evaluator at every live node of `grid` (for n = 1
    /// grids, along the axis y = 0); errors when any node maps outside
    /// the canonical domain.
    pub fn sample_onto(&self, grid: Grid) -> Result<ScalarField, FieldError> {
        let mut out = ScalarField::zeros(grid);
        for node in grid.live_nodes() {
            let c = grid.node_coords(node);
            out.set(node, self.evaluate(c)?);
        }
        Ok(out)
    }
}

/// Builds the extremal with `u(x0) = alpha`, `u(y0) = beta` out of the
/// canonical field.
pub fn transform_extremal(
    canonical_field: &ScalarField,
    x0: [f64; 2],
    y0: [f64; 2],
    alpha: f64,
    beta: f64,
) -> Result<TransformedExtremal, AnalysisError> {
    if canonical_field.grid().dim() != 2 {
        return Err(AnalysisError::NotTwoDimensional);
    }
    canonical_field.check_finite()?;
    if !(x0[0].is_finite() && x0[1].is_finite() && y0[0].is_finite() && y0[1].is_finite()) {
        return Err(AnalysisError::BadTransform("nonfinite pin point"));
    }
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(AnalysisError::BadTransform("nonfinite pin value"));
    }
    if x0 == y0 {
        return Err(AnalysisError::BadTransform("coincident pin points"));
    }
    if alpha == beta {
        return Err(AnalysisError::BadTransform("equal pin values"));
    }
    let dx = y0[0] - x0[0];
    let dy = y0[1] - x0[1];
    let sep = (dx * dx + dy * dy).sqrt();
    let dhat = [dx / sep, dy / sep];
    // Rotation by the signed angle from dhat to (0, -1).
    let cos = -dhat[1];
    let sin = -dhat[0];
    let rot = [[cos, -sin], [sin, cos]];
    let identity = x0 == [0.0, 1.0] && y0 == [0.0, -1.0] && alpha == 1.0 && beta == -1.0;
    Ok(TransformedExtremal {
        field: canonical_field.clone(),
        x0,
        rot,
        scale: 2.0 / sep,
        half_diff: 0.5 * (alpha - beta),
        half_sum: 0.5 * (alpha + beta),
        identity,
    })
}

/// Both sides of the stability inequality evaluated on a test field.
///
/// `slack = rhs - lhs`; discretization makes slightly negative slack
/// possible, so checks should use a relative floor rather than 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub c_star: f64,
    pub seminorm: f64,
    pub argmax: (Node, Node),
    /// p for p > 2, p/(p-1) for 1 < p <= 2.
    pub exponent: f64,
}

/// Evaluates the stability inequality for `test_field`: locates its
/// Hölder argmax, builds the matching extremal through those two points
/// (by transforming `canonical_field` for n = 2, exactly for n = 1), and
/// compares both sides with `C` replaced by the sharp-constant estimate
/// of `canonical_field`.
pub fn check_stability(
    test_field: &ScalarField,
    params: &EnergyParams,
    canonical_field: &ScalarField,
    canonical_constraints: &ConstraintSet,
) -> Result<StabilityReport, AnalysisError> {
    let grid = *test_field.grid();
    if grid.dim() != canonical_field.grid().dim() {
        return Err(AnalysisError::BadTransform(
            "test and canonical fields have different dimensions",
        ));
    }
    let mode = SeminormMode::Auto { seed: 17 };
    let c_star = sharp_constant_estimate(canonical_field, params, canonical_constraints, mode)?;

    let unconstrained =
        ConstraintSet::new(&grid, Vec::new()).expect("empty constraint set is valid");
    let holder = holder_seminorm(test_field, params, &unconstrained, mode)?;
    let (a, b) = holder.argmax_pair.ok_or(AnalysisError::DegenerateArgmax)?;
    let alpha = test_field.get(a);
    let beta = test_field.get(b);
    let pa = grid.node_coords(a);
    let pb = grid.node_coords(b);

    let matching = match grid.dim() {
        1 => ScalarField::from_fn_1d(grid, |x| extremal_1d_general(pa[0], pb[0], alpha, beta, x)),
        _ => transform_extremal(canonical_field, pa, pb, alpha, beta)?
            .sample_onto(grid)
            .map_err(|e| match e {
                FieldError::OutOfDomain(_) => AnalysisError::CoverageInsufficient,
                other => AnalysisError::Field(other),
            })?,
    };

    let diff_values: Vec<f64> = test_field
        .values()
        .iter()
        .zip(matching.values())
        .map(|(t, m)| t - m)
        .collect();
    let diff = ScalarField::from_values(grid, diff_values)?;

    let norm_test = physical_dirichlet_norm(test_field, params)?;
    let norm_diff = physical_dirichlet_norm(&diff, params)?;
    let sem = holder.seminorm;

    let p = params.p;
    let (exponent, lhs, rhs) = if p > 2.0 {
        let lhs = (0.5 * c_star).powf(p) * norm_diff.powf(p) + sem.powf(p);
        let rhs = c_star.powf(p) * norm_test.powf(p);
        (p, lhs, rhs)
    } else {
        let q = p / (p - 1.0);
        let lhs = 0.5_f64.powf(q) * norm_diff.powf(q) + sem.powf(q);
        let rhs = norm_test.powf(q);
        (q, lhs, rhs)
    };
    Ok(StabilityReport {
        lhs,
        rhs,
        slack: rhs - lhs,
        c_star,
        seminorm: sem,
        argmax: (a, b),
        exponent,
    })
}
