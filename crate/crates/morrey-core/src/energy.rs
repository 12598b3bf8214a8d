//! The discretized p-Dirichlet energy, its exact analytic gradient, the
//! physically scaled norm, and the discrete p-Laplacian residual.
//!
//! For n = 2 the energy is
//! `E(v) = sum_{i,j=1}^{N-1} ((v_{i+1,j}-v_{i,j})^2 + (v_{i,j+1}-v_{i,j})^2)^{p/2}`,
//! for n = 1 it is `sum_{i=1}^{N-1} |v_{i+1}-v_i|^p`; forward differences
//! only, exactly as the approximation chain is written, and the corner
//! `v_{N,N}` is never referenced. The optimizer works on this unscaled E;
//! the `h^{n-p}` physical factor enters only through
//! [`physical_dirichlet_norm`].

use thiserror::Error;

use crate::field::{ConstraintSet, Grid, Node, ScalarField};

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("p must be finite and exceed the spatial dimension {dim}, got {p}")]
    BadExponent { p: f64, dim: usize },
    #[error("smoothing epsilon must be finite and nonnegative, got {0}")]
    BadSmoothing(f64),
    #[error("field contains non-finite values")]
    NonFiniteField,
    #[error(
        "gradient of the unsmoothed energy needs p >= 2; for p in (n, 2) set smoothing_eps > 0"
    )]
    NonsmoothGradient,
    #[error("field is constant: Dirichlet norm is zero")]
    ZeroNorm,
}

/// Energy exponent and optional smoothing: the smoothed cell term is
/// `(|g|^2 + eps^2)^{p/2} - eps^p`, which reduces to `(|g|^2)^{p/2}` at
/// `eps = 0`. Smoothing is an opt-in for p in (1, 2) on 1D grids, where
/// the raw derivative is not Lipschitz at vanishing differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub p: f64,
    pub smoothing_eps: f64,
}

impl EnergyParams {
    pub fn new(p: f64) -> Self {
        EnergyParams {
            p,
            smoothing_eps: 0.0,
        }
    }

    pub fn with_smoothing(p: f64, smoothing_eps: f64) -> Self {
        EnergyParams { p, smoothing_eps }
    }

    pub fn validate(&self, dim: usize) -> Result<(), EnergyError> {
        if !self.p.is_finite() || self.p <= dim as f64 {
            return Err(EnergyError::BadExponent { p: self.p, dim });
        }
        if !self.smoothing_eps.is_finite() || self.smoothing_eps < 0.0 {
            return Err(EnergyError::BadSmoothing(self.smoothing_eps));
        }
        Ok(())
    }

    fn gradient_is_smooth(&self) -> bool {
        self.p >= 2.0 || self.smoothing_eps > 0.0
    }
}

/// `q^{p/2}` for `q >= 0`, with cheap exact paths for the exponents the
/// descent loop hits constantly.
#[inline]
pub(crate) fn pow_p_half(q: f64, p: f64) -> f64 {
    if p == 2.0 {
        q
    } else if p == 4.0 {
        q * q
    } else if p == 6.0 {
        q * q * q
    } else if p == 3.0 {
        q * q.sqrt()
    } else {
        q.powf(0.5 * p)
    }
}

/// `q^{(p-2)/2}` for `q >= 0`, the weight of the analytic gradient.
#[inline]
fn pow_p_minus_2_half(q: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if p == 4.0 {
        q
    } else if p == 6.0 {
        q * q
    } else if p == 3.0 {
        q.sqrt()
    } else {
        q.powf(0.5 * (p - 2.0))
    }
}

/// Energy kernel on a raw 1D value array of any length >= 2.
pub fn energy_1d_raw(values: &[f64], p: f64, eps: f64) -> f64 {
    let eps2 = eps * eps;
    let eps_p = if eps > 0.0 { eps.powf(p) } else { 0.0 };
    let mut total = 0.0;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        total += pow_p_half(d * d + eps2, p) - eps_p;
    }
    total
}

/// Energy kernel on a raw row-major `n_axis x n_axis` array (any
/// `n_axis >= 2`); the corner entry is never read.
pub fn energy_2d_raw(values: &[f64], n_axis: usize, p: f64, eps: f64) -> f64 {
    debug_assert_eq!(values.len(), n_axis * n_axis);
    let eps2 = eps * eps;
    let eps_p = if eps > 0.0 { eps.powf(p) } else { 0.0 };
    let mut total = 0.0;
    for i in 0..n_axis - 1 {
        let row = i * n_axis;
        let next_row = row + n_axis;
        for j in 0..n_axis - 1 {
            let v = values[row + j];
            let d1 = values[next_row + j] - v;
            let d2 = values[row + j + 1] - v;
            total += pow_p_half(d1 * d1 + d2 * d2 + eps2, p) - eps_p;
        }
    }
    total
}

pub(crate) fn energy_unchecked(field: &ScalarField, params: &EnergyParams) -> f64 {
    match field.grid().dim() {
        1 => energy_1d_raw(field.values(), params.p, params.smoothing_eps),
        _ => energy_2d_raw(
            field.values(),
            field.grid().nodes_per_axis(),
            params.p,
            params.smoothing_eps,
        ),
    }
}

/// The discrete p-Dirichlet energy `E(v) >= 0`.
pub fn discrete_energy(field: &ScalarField, params: &EnergyParams) -> Result<f64, EnergyError> {
    params.validate(field.grid().dim())?;
    field
        .check_finite()
        .map_err(|_| EnergyError::NonFiniteField)?;
    Ok(energy_unchecked(field, params))
}

/// `(h^{n-p} E(v))^{1/p}`, the discrete approximation of the L^p norm of
/// the gradient.
pub fn physical_dirichlet_norm(
    field: &ScalarField,
    params: &EnergyParams,
) -> Result<f64, EnergyError> {
    let e = discrete_energy(field, params)?;
    let grid = field.grid();
    let scale = grid
        .spacing()
        .powf(grid.dim() as f64 - params.p);
    Ok((scale * e).powf(1.0 / params.p))
}

/// Node-indexed partial derivatives of the discrete energy. Entries at
/// constrained nodes are computed like any other; masking happens in
/// [`p_laplacian_residual`] and in the descent update. The 2D corner entry
/// is identically 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    grid: Grid,
    values: Vec<f64>,
}

impl GradientField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, node: Node) -> f64 {
        self.values[self.grid.offset(node)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Accumulates the analytic gradient into `out` (which is zeroed first).
/// Each energy term scatters into the at most three nodes it references.
pub(crate) fn gradient_into(
    values: &[f64],
    grid: &Grid,
    params: &EnergyParams,
    out: &mut [f64],
) {
    let p = params.p;
    let eps2 = params.smoothing_eps * params.smoothing_eps;
    out.fill(0.0);
    match grid.dim() {
        1 => {
            for i in 0..values.len() - 1 {
                let d = values[i + 1] - values[i];
                let w = p * pow_p_minus_2_half(d * d + eps2, p) * d;
                out[i] -= w;
                out[i + 1] += w;
            }
        }
        _ => {
            let n = grid.nodes_per_axis();
            for i in 0..n - 1 {
                let row = i * n;
                let next_row = row + n;
                for j in 0..n - 1 {
                    let v = values[row + j];
                    let d1 = values[next_row + j] - v;
                    let d2 = values[row + j + 1] - v;
                    let w = p * pow_p_minus_2_half(d1 * d1 + d2 * d2 + eps2, p);
                    out[row + j] -= w * (d1 + d2);
                    out[next_row + j] += w * d1;
                    out[row + j + 1] += w * d2;
                }
            }
        }
    }
}

/// Exact analytic gradient of [`discrete_energy`] (or of its smoothed
/// variant when `smoothing_eps > 0`).
pub fn energy_gradient(
    field: &ScalarField,
    params: &EnergyParams,
) -> Result<GradientField, EnergyError> {
    params.validate(field.grid().dim())?;
    if !params.gradient_is_smooth() {
        return Err(EnergyError::NonsmoothGradient);
    }
    field
        .check_finite()
        .map_err(|_| EnergyError::NonFiniteField)?;
    let mut out = vec![0.0; field.values().len()];
    gradient_into(field.values(), field.grid(), params, &mut out);
    Ok(GradientField {
        grid: *field.grid(),
        values: out,
    })
}

/// Max over unconstrained nodes (excluding the 2D corner) of the absolute
/// gradient entry; zero at a discrete minimizer, mirroring a vanishing
/// p-Laplacian away from the pinned points.
pub fn p_laplacian_residual(
    field: &ScalarField,
    params: &EnergyParams,
    constraints: &ConstraintSet,
) -> Result<f64, EnergyError> {
    let gradient = energy_gradient(field, params)?;
    Ok(residual_from_gradient(
        gradient.values(),
        field.grid(),
        constraints,
    ))
}

pub(crate) fn residual_from_gradient(
    gradient: &[f64],
    grid: &Grid,
    constraints: &ConstraintSet,
) -> f64 {
    let mut max_abs: f64 = 0.0;
    for node in grid.live_nodes() {
        if constraints.is_constrained(node) {
            continue;
        }
        max_abs = max_abs.max(gradient[grid.offset(node)].abs());
    }
    max_abs
}
