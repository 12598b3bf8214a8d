//! Finite chains of balls connecting two points outside an exclusion ball.
//!
//! For `x, y` outside `B_{2R}(0)` the chain construction produces at most
//! eight intermediate points such that every consecutive pair `(a, b)` has
//! `|a - b| <= |x - y|` and the ball `B_{|a-b|/2}((a+b)/2)` avoids
//! `B_R(0)`. The construction is built up from an isosceles-triangle angle
//! `theta(a)`, chains along a circle, equal-norm and general-norm
//! corollaries in the plane, and a subspace embedding for higher
//! dimensions.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("leg-ratio parameter must satisfy {requirement}, got {value}")]
    BadParameter {
        requirement: &'static str,
        value: f64,
    },
    #[error("point norm {got:.6e} differs from required {expected:.6e}")]
    NormMismatch { expected: f64, got: f64 },
    #[error("separation {separation:.6e} does not exceed the step length {step:.6e}; use a single-hop chain")]
    TooClose { separation: f64, step: f64 },
    #[error("points must have dimension {expected}, got {got}")]
    BadDimension { expected: &'static str, got: usize },
    #[error("|point| = {norm:.6e} is inside the required annulus (needs >= {min:.6e})")]
    InsideExclusion { norm: f64, min: f64 },
    #[error("chain endpoints coincide")]
    IdenticalEndpoints,
}

/// Leg-ratio parameter `a` together with the isosceles apex angle
/// `theta(a) = arccos(1 - (a/(1+a))^2 / 2)`: the angle subtended at the
/// origin by a chord of length `a` on the circle of radius `1+a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleParams {
    pub a: f64,
    pub theta: f64,
}

impl AngleParams {
    pub fn new(a: f64) -> Result<Self, ChainError> {
        Ok(AngleParams { a, theta: theta(a)? })
    }
}

/// `arccos(1 - (a/(1+a))^2 / 2)`, strictly increasing on `(0, inf)` with
/// values in `(0, pi/3)`; `theta(1) = arccos(7/8) > pi/7`.
pub fn theta(a: f64) -> Result<f64, ChainError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(ChainError::BadParameter {
            requirement: "a > 0",
            value: a,
        });
    }
    let r = a / (1.0 + a);
    Ok((1.0 - 0.5 * r * r).acos())
}

/// A chain of intermediate points `z_1, ..., z_m` from `x` to `y`, with
/// the ball `B_{|a-b|/2}((a+b)/2)` over every consecutive pair of the
/// path `x, z_1, ..., z_m, y`. All balls avoid `B_{r_exclusion}(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// One `(center, radius)` per consecutive pair of the full path.
    pub balls: Vec<(Vec<f64>, f64)>,
    pub r_exclusion: f64,
}

impl Chain {
    /// Number of intermediate points.
    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Full path `x, z_1, ..., z_m, y`.
    pub fn path(&self) -> Vec<Vec<f64>> {
        let mut path = Vec::with_capacity(self.points.len() + 2);
        path.push(self.x.clone());
        path.extend(self.points.iter().cloned());
        path.push(self.y.clone());
        path
    }

    /// Lengths of the consecutive hops along the path.
    pub fn step_lengths(&self) -> Vec<f64> {
        self.path().windows(2).map(|w| dist(&w[0], &w[1])).collect()
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_vec = |v: &[f64]| {
            let parts: Vec<String> = v.iter().map(|c| format!("{c:+.9e}")).collect();
            format!("[{}]", parts.join(", "))
        };
        writeln!(
            f,
            "chain: n = {}, m = {}, exclusion radius = {:.9e}",
            self.x.len(),
            self.m(),
            self.r_exclusion
        )?;
        writeln!(f, "  x  = {}", fmt_vec(&self.x))?;
        writeln!(f, "  y  = {}", fmt_vec(&self.y))?;
        for (idx, z) in self.points.iter().enumerate() {
            writeln!(f, "  z{} = {}", idx + 1, fmt_vec(z))?;
        }
        for (idx, (center, radius)) in self.balls.iter().enumerate() {
            writeln!(
                f,
                "  ball {}: center = {}, radius = {:.9e}, clearance = {:.9e}",
                idx + 1,
                fmt_vec(center),
                radius,
                norm(center) - radius
            )?;
        }
        Ok(())
    }
}

/// Itemized verification of a chain's three conclusions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainReport {
    pub m: usize,
    pub m_ok: bool,
    pub endpoint_distance: f64,
    pub max_step: f64,
    pub distance_ok: bool,
    pub min_clearance: f64,
    pub exclusion_radius: f64,
    pub inclusion_ok: bool,
}

impl ChainReport {
    pub fn all_ok(&self) -> bool {
        self.m_ok && self.distance_ok && self.inclusion_ok
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "  m = {} (<= 8): {}", self.m, flag(self.m_ok))?;
        writeln!(
            f,
            "  max step = {:.9e} vs |x - y| = {:.9e}: {}",
            self.max_step,
            self.endpoint_distance,
            flag(self.distance_ok)
        )?;
        writeln!(
            f,
            "  min ball clearance = {:.9e} vs exclusion radius = {:.9e}: {}",
            self.min_clearance,
            self.exclusion_radius,
            flag(self.inclusion_ok)
        )?;
        writeln!(f, "  verdict: {}", flag(self.all_ok()))
    }
}

/// Verification slack; the chain inequalities are non-strict at their
/// boundaries, so exact comparisons would flag round-off as failure.
const SLACK: f64 = 1e-12;
/// Relative tolerance on caller-normalized inputs (norms, angle
/// boundaries).
const INPUT_TOL: f64 = 1e-9;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

fn scale(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().map(|x| c * x).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Balls over consecutive pairs of a path.
fn balls_over(path: &[Vec<f64>]) -> Vec<(Vec<f64>, f64)> {
    path.windows(2)
        .map(|w| {
            let center: Vec<f64> = w[0].iter().zip(&w[1]).map(|(p, q)| 0.5 * (p + q)).collect();
            (center, 0.5 * dist(&w[0], &w[1]))
        })
        .collect()
}

fn require_dim2(v: &[f64]) -> Result<(), ChainError> {
    if v.len() != 2 {
        return Err(ChainError::BadDimension {
            expected: "2",
            got: v.len(),
        });
    }
    Ok(())
}

fn require_norm(v: &[f64], expected: f64) -> Result<(), ChainError> {
    let got = norm(v);
    if (got - expected).abs() > INPUT_TOL * expected {
        return Err(ChainError::NormMismatch { expected, got });
    }
    Ok(())
}

/// Chain along the circle of radius `1+a`: intermediate points at angles
/// `j * theta(a)` from `x` toward `y` (reflected for the short way around,
/// pre-rotated for general `x`), so every hop has length exactly `a` and
/// the final gap to `y` is at most `a`. Requires `a >= 1` and
/// `|x| = |y| = 1 + a`; errors when `|y - x| <= a`, where a single hop
/// should be used instead.
pub fn chain_on_circle(x: &[f64], y: &[f64], a: f64) -> Result<Chain, ChainError> {
    require_dim2(x)?;
    require_dim2(y)?;
    if !(a >= 1.0) || !a.is_finite() {
        return Err(ChainError::BadParameter {
            requirement: "a >= 1",
            value: a,
        });
    }
    let radius = 1.0 + a;
    require_norm(x, radius)?;
    require_norm(y, radius)?;
    let th = theta(a)?;

    let phi_x = x[1].atan2(x[0]);
    let mut rel = y[1].atan2(y[0]) - phi_x;
    if rel > std::f64::consts::PI {
        rel -= 2.0 * std::f64::consts::PI;
    } else if rel <= -std::f64::consts::PI {
        rel += 2.0 * std::f64::consts::PI;
    }
    let sigma = if rel >= 0.0 { 1.0 } else { -1.0 };
    let vartheta = rel.abs();

    // |y - x| > a is equivalent to vartheta > theta(a); accept the exact
    // boundary up to round-off since the conclusions still hold there.
    if vartheta < th * (1.0 - INPUT_TOL) {
        return Err(ChainError::TooClose {
            separation: dist(x, y),
            step: a,
        });
    }
    // (m-1) theta <= vartheta < m theta; when vartheta is a near-exact
    // multiple q*theta take m = q, placing z_m on y itself.
    let ratio = vartheta / th;
    let q = ratio.round();
    let m = if q >= 1.0 && (ratio - q).abs() <= INPUT_TOL {
        q as usize
    } else {
        ratio.floor() as usize + 1
    };
    debug_assert!((1..=7).contains(&m));

    let points: Vec<Vec<f64>> = (1..=m)
        .map(|j| {
            let ang = phi_x + sigma * (j as f64) * th;
            vec![radius * ang.cos(), radius * ang.sin()]
        })
        .collect();

    let mut path = vec![x.to_vec()];
    path.extend(points.iter().cloned());
    path.push(y.to_vec());
    let balls = balls_over(&path);
    Ok(Chain {
        x: x.to_vec(),
        y: y.to_vec(),
        points,
        balls,
        r_exclusion: 1.0,
    })
}

/// Equal-norm chain: for `|x| = |y| = t + s` with `s >= t > 0` and
/// `|y - x| > s`, rescales [`chain_on_circle`] with `a = s/t` so all
/// points keep norm `t + s`, hops have length `s`, and the balls avoid
/// `B_t(0)`.
pub fn chain_equal_norm(x: &[f64], y: &[f64], t: f64, s: f64) -> Result<Chain, ChainError> {
    require_dim2(x)?;
    require_dim2(y)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(ChainError::BadParameter {
            requirement: "t > 0",
            value: t,
        });
    }
    if !(s >= t) || !s.is_finite() {
        return Err(ChainError::BadParameter {
            requirement: "s >= t",
            value: s,
        });
    }
    require_norm(x, t + s)?;
    require_norm(y, t + s)?;

    let unit = chain_on_circle(&scale(x, 1.0 / t), &scale(y, 1.0 / t), s / t).map_err(|e| {
        match e {
            ChainError::TooClose { .. } => ChainError::TooClose {
                separation: dist(x, y),
                step: s,
            },
            other => other,
        }
    })?;
    let points: Vec<Vec<f64>> = unit.points.iter().map(|z| scale(z, t)).collect();
    let mut path = vec![x.to_vec()];
    path.extend(points.iter().cloned());
    path.push(y.to_vec());
    let balls = balls_over(&path);
    Ok(Chain {
        x: x.to_vec(),
        y: y.to_vec(),
        points,
        balls,
        r_exclusion: t,
    })
}

/// General-norm planar chain: for `|y| >= |x| = t + s` with the radial
/// projection `x* = |x| y / |y|` satisfying `|x* - x| > s`, runs the
/// equal-norm chain from `x` to `x*` and appends `x*` itself, leaving the
/// radial hop `x* -> y` of length `|y| - |x| <= |x - y|` last.
pub fn chain_general_2d(x: &[f64], y: &[f64], t: f64, s: f64) -> Result<Chain, ChainError> {
    require_dim2(x)?;
    require_dim2(y)?;
    let norm_y = norm(y);
    if norm_y < norm(x) * (1.0 - INPUT_TOL) {
        return Err(ChainError::NormMismatch {
            expected: norm(x),
            got: norm_y,
        });
    }
    let xstar = scale(y, norm(x) / norm_y);
    let mut inner = chain_equal_norm(x, &xstar, t, s)?;
    inner.points.push(xstar);

    let mut path = vec![x.to_vec()];
    path.extend(inner.points.iter().cloned());
    path.push(y.to_vec());
    let balls = balls_over(&path);
    Ok(Chain {
        x: x.to_vec(),
        y: y.to_vec(),
        points: inner.points,
        balls,
        r_exclusion: t,
    })
}

/// Subspace embedding of [`chain_general_2d`]: builds an orthonormal basis
/// of `span{x, y}` (pivoting on the larger-norm vector `y`; antiparallel
/// inputs get a deterministic orthonormal completion), chains in
/// coordinates, and maps back. All conclusions are preserved by the
/// isometry.
pub fn chain_nd(x: &[f64], y: &[f64], t: f64, s: f64) -> Result<Chain, ChainError> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(ChainError::BadDimension {
            expected: ">= 2, equal for x and y",
            got: if y.len() != n { y.len() } else { n },
        });
    }
    if n == 2 {
        return chain_general_2d(x, y, t, s);
    }
    let norm_x = norm(x);
    let norm_y = norm(y);
    if norm_y <= 0.0 || norm_x <= 0.0 {
        return Err(ChainError::IdenticalEndpoints);
    }
    let u1 = scale(y, 1.0 / norm_y);
    let proj = dot(x, &u1);
    let mut w: Vec<f64> = x.iter().zip(&u1).map(|(xi, ui)| xi - proj * ui).collect();
    let norm_w = norm(&w);
    let u2 = if norm_w > 1e-12 * norm_x {
        scale(&w, 1.0 / norm_w)
    } else if proj > 0.0 {
        // Same direction: |x| y/|y| = x, so the separation precondition
        // cannot hold; the caller should use the single-hop case.
        return Err(ChainError::TooClose {
            separation: 0.0,
            step: s,
        });
    } else {
        // Antiparallel: complete the basis with the coordinate axis
        // least aligned with u1.
        let axis = (0..n)
            .min_by(|&i, &j| u1[i].abs().partial_cmp(&u1[j].abs()).unwrap())
            .unwrap();
        w = (0..n)
            .map(|i| (if i == axis { 1.0 } else { 0.0 }) - u1[axis] * u1[i])
            .collect();
        scale(&w, 1.0 / norm(&w))
    };

    let x2 = vec![proj, dot(x, &u2)];
    let y2 = vec![norm_y, 0.0];
    let planar = chain_general_2d(&x2, &y2, t, s)?;
    let lift = |c: &[f64]| -> Vec<f64> {
        (0..n).map(|i| c[0] * u1[i] + c[1] * u2[i]).collect()
    };
    let points: Vec<Vec<f64>> = planar.points.iter().map(|z| lift(z)).collect();
    let mut path = vec![x.to_vec()];
    path.extend(points.iter().cloned());
    path.push(y.to_vec());
    let balls = balls_over(&path);
    Ok(Chain {
        x: x.to_vec(),
        y: y.to_vec(),
        points,
        balls,
        r_exclusion: t,
    })
}

/// The full chain construction for `x, y` outside `B_{2R}(0)`: after
/// ordering so the first endpoint has the smaller norm, set
/// `S = |x| - R`; if the radial projection `|x| y/|y|` is within `S` of
/// `x` it is the single intermediate point, otherwise the subspace chain
/// runs with `t = R`, `s = S`. The result has `m <= 8`, every hop at most
/// `|x - y|`, and every ball clear of `B_R(0)`.
pub fn finite_chain(x: &[f64], y: &[f64], r: f64) -> Result<Chain, ChainError> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(ChainError::BadDimension {
            expected: ">= 2, equal for x and y",
            got: if y.len() != n { y.len() } else { n },
        });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(ChainError::BadParameter {
            requirement: "R > 0",
            value: r,
        });
    }
    if x == y {
        return Err(ChainError::IdenticalEndpoints);
    }
    for v in [x, y] {
        let nv = norm(v);
        if nv < 2.0 * r * (1.0 - SLACK) {
            return Err(ChainError::InsideExclusion {
                norm: nv,
                min: 2.0 * r,
            });
        }
    }

    let swapped = norm(x) > norm(y);
    let (lo, hi) = if swapped { (y, x) } else { (x, y) };
    let s_cap = norm(lo) - r;
    let xstar = scale(hi, norm(lo) / norm(hi));

    let mut points = if dist(&xstar, lo) <= s_cap {
        vec![xstar]
    } else {
        chain_nd(lo, hi, r, s_cap)?.points
    };
    if swapped {
        points.reverse();
    }

    let mut path = vec![x.to_vec()];
    path.extend(points.iter().cloned());
    path.push(y.to_vec());
    let balls = balls_over(&path);
    Ok(Chain {
        x: x.to_vec(),
        y: y.to_vec(),
        points,
        balls,
        r_exclusion: r,
    })
}

/// Checks the three chain conclusions with absolute slack `1e-12`:
/// `m <= 8`, every hop at most `|x - y|`, and every ball's clearance
/// `|center| - radius` at least the exclusion radius.
pub fn verify_chain(chain: &Chain) -> ChainReport {
    let endpoint_distance = dist(&chain.x, &chain.y);
    let steps = chain.step_lengths();
    let max_step = steps.iter().cloned().fold(0.0, f64::max);
    let min_clearance = chain
        .balls
        .iter()
        .map(|(center, radius)| norm(center) - radius)
        .fold(f64::INFINITY, f64::min);
    let m = chain.m();
    ChainReport {
        m,
        m_ok: (1..=8).contains(&m),
        endpoint_distance,
        max_step,
        distance_ok: max_step <= endpoint_distance + SLACK,
        min_clearance,
        exclusion_radius: chain.r_exclusion,
        inclusion_ok: min_clearance >= chain.r_exclusion - SLACK,
    }
}
