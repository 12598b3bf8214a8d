//! Closed-form one-dimensional extremal theory: the exact extremal,
//! the exact sharp constant C* = 1, and the Hölder-ratio integral bound.
//! These quantities anchor the whole pipeline with zero-tolerance oracles.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OneDError {
    #[error("need y < x with at least two samples covering [y, x]")]
    InsufficientSampling,
    #[error("exponent p must be finite and exceed 1, got {0}")]
    BadExponent(f64),
}

/// The 1D extremal for the canonical pins u(-1) = -1, u(1) = 1:
/// -1 for x < -1, x on [-1, 1], 1 for x > 1.
pub fn exact_extremal_1d(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// The sharp constant in one dimension, exactly 1.
pub fn exact_sharp_constant_1d() -> f64 {
    1.0
}

/// The general 1D extremal through `u(x0) = alpha`, `u(y0) = beta`:
/// a linear ramp between the pins, constant outside.
pub fn extremal_1d_general(x0: f64, y0: f64, alpha: f64, beta: f64, x: f64) -> f64 {
    debug_assert!(x0 != y0);
    let t = ((x - x0) / (y0 - x0)).clamp(0.0, 1.0);
    alpha + (beta - alpha) * t
}

/// Evaluates the fundamental-theorem estimate on uniform samples of `u`
/// over `[y, x]`: returns the Hölder ratio `|u(x)-u(y)| / |x-y|^{1-1/p}`
/// and the quadrature bound `(integral of |u'|^p)^{1/p}`, where the
/// integral uses the piecewise-constant slope of the samples. The ratio
/// never exceeds the bound (up to round-off); the clamp on `[-1, 1]`
/// realizes equality.
pub fn holder_ratio_integral_bound(
    u_samples: &[f64],
    x: f64,
    y: f64,
    p: f64,
) -> Result<(f64, f64), OneDError> {
    if !p.is_finite() || p <= 1.0 {
        return Err(OneDError::BadExponent(p));
    }
    if !(y < x) || u_samples.len() < 2 {
        return Err(OneDError::InsufficientSampling);
    }
    let n_sub = u_samples.len() - 1;
    let h = (x - y) / n_sub as f64;
    let ratio =
        (u_samples[n_sub] - u_samples[0]).abs() / (x - y).powf(1.0 - 1.0 / p);
    let mut integral = 0.0;
    for w in u_samples.windows(2) {
        let slope = (w[1] - w[0]) / h;
        integral += slope.abs().powf(p) * h;
    }
    Ok((ratio, integral.powf(1.0 / p)))
}
