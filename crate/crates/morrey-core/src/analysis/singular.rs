//! Local behavior at the pinned points: the extremal looks like
//! `u(x0) - gamma |x - x0|^sigma` with `sigma = (p-n)/(p-1)`, and the
//! coefficient `gamma` fixes the Dirac mass `n omega_n (sigma gamma)^(p-1)`
//! carried by the p-Laplacian of the extremal at `x0`.

use crate::analysis::AnalysisError;
use crate::energy::EnergyParams;
use crate::field::{node_distance, ConstraintSet, Node, ScalarField};

/// Largest fit radius ever used; keeps the samples well inside the
/// p-harmonic annulus around a pinned point.
const RADIUS_CAP: f64 = 0.4;
/// Preferred radii in units of the grid spacing. Anchoring the smallest
/// circle at 8h keeps the bilinear sampling bias on the fitted slope a
/// factor of a few below the 1e-3 calibration target; a 4h anchor
/// measurably misses it.
const LADDER: [f64; 5] = [8.0, 12.0, 16.0, 24.0, 32.0];
const MIN_SURVIVORS: usize = 4;
const FALLBACK_COUNT: usize = 5;
const ANGLES: usize = 64;

/// Log-log least-squares fit of the radial decay away from `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularFit {
    pub center: [f64; 2],
    /// Circle radii used, ascending.
    pub radii: Vec<f64>,
    /// Fitted exponent: slope of `ln(u(center) - mean u)` against `ln r`;
    /// the continuum value is `(p-n)/(p-1)`. Averaging each circle before
    /// the log cancels the angular part of the interpolation error, which
    /// a per-sample fit would fold into the slope.
    pub exponent: f64,
    /// Fitted coefficient `gamma = exp(intercept)`.
    pub gamma: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
}

fn fit_radii(h: f64, d_other: f64) -> Result<Vec<f64>, AnalysisError> {
    let rmax = RADIUS_CAP.min(0.5 * d_other);
    let rmin = 2.0 * h;
    if rmax < rmin {
        return Err(AnalysisError::RadiiOutOfRange { rmax, min: rmin });
    }
    let survivors: Vec<f64> = LADDER
        .iter()
        .map(|&m| m * h)
        .filter(|&r| r <= rmax)
        .collect();
    if survivors.len() >= MIN_SURVIVORS {
        return Ok(survivors);
    }
    let lo = rmin.max(0.5 * rmax);
    let step = (rmax - lo) / (FALLBACK_COUNT - 1) as f64;
    Ok((0..FALLBACK_COUNT).map(|i| lo + step * i as f64).collect())
}

/// Fits `ln(u(center) - u)` against `ln r` over circle means of
/// interpolated samples around a pinned local maximum.
///
/// Radii run over `{8h, 12h, 16h, 24h, 32h}` clipped to
/// `[2h, min(0.4, half the distance to the nearest other pin)]`; when
/// fewer than 4 ladder radii survive the clip, 5 evenly spaced radii
/// spanning the upper half of the admissible interval are used instead.
pub fn fit_singular_exponent(
    field: &ScalarField,
    center: Node,
    params: &EnergyParams,
    constraints: &ConstraintSet,
) -> Result<SingularFit, AnalysisError> {
    let grid = field.grid();
    if grid.dim() != 2 {
        return Err(AnalysisError::NotTwoDimensional);
    }
    params.validate(grid.dim())?;
    field.check_finite()?;
    if !constraints.is_constrained(center) {
        return Err(AnalysisError::BadCenter);
    }
    let d_other = constraints
        .entries()
        .iter()
        .filter(|&&(node, _)| node != center)
        .map(|&(node, _)| node_distance(grid, node, center))
        .fold(f64::INFINITY, f64::min);
    let radii = fit_radii(grid.spacing(), d_other)?;

    let c = grid.node_coords(center);
    let u_center = field.get(center);
    let mut log_r = Vec::with_capacity(radii.len());
    let mut log_d = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut sum = 0.0;
        for a in 0..ANGLES {
            let phi = 2.0 * std::f64::consts::PI * a as f64 / ANGLES as f64;
            let point = [c[0] + r * phi.cos(), c[1] + r * phi.sin()];
            sum += field.interpolate(&point)?;
        }
        let diff = u_center - sum / ANGLES as f64;
        if diff <= 0.0 {
            return Err(AnalysisError::NonpositiveDifference { radius: r });
        }
        log_r.push(r.ln());
        log_d.push(diff.ln());
    }

    let m = log_r.len() as f64;
    let mean_r = log_r.iter().sum::<f64>() / m;
    let mean_d = log_d.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in log_r.iter().zip(&log_d) {
        sxx += (x - mean_r) * (x - mean_r);
        sxy += (x - mean_r) * (y - mean_d);
    }
    let exponent = sxy / sxx;
    let intercept = mean_d - exponent * mean_r;
    let mut ss = 0.0;
    for (&x, &y) in log_r.iter().zip(&log_d) {
        let e = y - (exponent * x + intercept);
        ss += e * e;
    }
    Ok(SingularFit {
        center: c,
        radii,
        exponent,
        gamma: intercept.exp(),
        residual: (ss / m).sqrt(),
    })
}

fn n_omega_n(n: usize) -> f64 {
    match n {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI,
    }
}

/// Dirac mass at a singular point from the fitted decay coefficient:
/// `n omega_n ((p-n)/(p-1) gamma)^(p-1)`.
pub fn dirac_mass_from_gamma(gamma: f64, p: f64, n: usize) -> f64 {
    let sigma = (p - n as f64) / (p - 1.0);
    n_omega_n(n) * (sigma * gamma).powf(p - 1.0)
}

/// The same mass from the extremal's normalization: the Euler-Lagrange
/// measure carries weight
/// `|alpha - beta|^(p-2) (alpha - beta) / (C^p |x0 - y0|^(p-n))`
/// at the maximum point; for the canonical data (+1, -1 at distance 2)
/// this is `2^(n-1) / C^p`.
pub fn dirac_mass_from_normalization(
    alpha: f64,
    beta: f64,
    separation: f64,
    c_star: f64,
    p: f64,
    n: usize,
) -> f64 {
    let d = alpha - beta;
    d.abs().powf(p - 2.0) * d / (c_star.powf(p) * separation.powf(p - n as f64))
}
