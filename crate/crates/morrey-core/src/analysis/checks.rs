//! Qualitative checks on canonical 2D fields: reflection antisymmetry,
//! mirror symmetry, pointwise bounds, level-set convexity, midplane
//! gradient sign, gradient nonvanishing, and the outside-energy fraction
//! behind the strictness of Morrey-estimate constants.
//!
//! The canonical problem pins (0, 1) to +1 and (0, -1) to -1, so the
//! midplane is y = 0 and symmetry maps are grid-exact.

use crate::analysis::hull::{convex_hull, hull_contains};
use crate::analysis::AnalysisError;
use crate::energy::{energy_1d_raw, pow_p_half, EnergyParams};
use crate::field::{node_distance, ConstraintSet, Node, ScalarField};

/// Containment tolerance for hull queries (a length).
const HULL_TOL: f64 = 1e-9;

fn require_2d(field: &ScalarField) -> Result<(), AnalysisError> {
    if field.grid().dim() != 2 {
        return Err(AnalysisError::NotTwoDimensional);
    }
    Ok(())
}

/// Max over live node pairs `(x, y), (x, -y)` of `|u(x,-y) + u(x,y)|`;
/// zero for a field odd in y.
pub fn check_reflection_antisymmetry(field: &ScalarField) -> Result<f64, AnalysisError> {
    require_2d(field)?;
    let grid = field.grid();
    let n = grid.nodes_per_axis();
    let mut worst = 0.0f64;
    for node in grid.live_nodes() {
        let mirrored = Node::new(node.i, n + 1 - node.j);
        if grid.is_dead_corner(mirrored) {
            continue;
        }
        worst = worst.max((field.get(mirrored) + field.get(node)).abs());
    }
    Ok(worst)
}

/// Max over live node pairs `(x, y), (-x, y)` of `|u(-x,y) - u(x,y)|`;
/// zero for a field even in x. This is the planar reduction of
/// cylindrical symmetry about the axis through the pinned points.
pub fn check_cylindrical_symmetry(field: &ScalarField) -> Result<f64, AnalysisError> {
    require_2d(field)?;
    let grid = field.grid();
    let n = grid.nodes_per_axis();
    let mut worst = 0.0f64;
    for node in grid.live_nodes() {
        let mirrored = Node::new(n + 1 - node.i, node.j);
        if grid.is_dead_corner(mirrored) {
            continue;
        }
        worst = worst.max((field.get(mirrored) - field.get(node)).abs());
    }
    Ok(worst)
}

/// Overshoot magnitudes of the pointwise bounds: `-1 <= u <= 1`
/// everywhere, `0 < u < 1` on the open upper half-plane, `-1 < u < 0` on
/// the open lower half-plane. Equality at the pinned values measures as
/// zero overshoot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub range_overshoot: f64,
    pub upper_half_overshoot: f64,
    pub lower_half_overshoot: f64,
}

impl BoundsReport {
    pub fn max_violation(&self) -> f64 {
        self.range_overshoot
            .max(self.upper_half_overshoot)
            .max(self.lower_half_overshoot)
    }
}

pub fn check_pointwise_bounds(
    field: &ScalarField,
    _constraints: &ConstraintSet,
) -> Result<BoundsReport, AnalysisError> {
    require_2d(field)?;
    let grid = field.grid();
    let mut range = 0.0f64;
    let mut upper = 0.0f64;
    let mut lower = 0.0f64;
    for node in grid.live_nodes() {
        let u = field.get(node);
        range = range.max(u - 1.0).max(-1.0 - u);
        let y = grid.coord(node.j);
        if y > 0.0 {
            upper = upper.max(-u).max(u - 1.0);
        } else if y < 0.0 {
            lower = lower.max(u).max(-1.0 - u);
        }
    }
    Ok(BoundsReport {
        range_overshoot: range.max(0.0),
        upper_half_overshoot: upper.max(0.0),
        lower_half_overshoot: lower.max(0.0),
    })
}

/// Hull deficit of one level: how far any grid node inside the convex
/// hull of the superlevel (upper half) or sublevel (lower half) set
/// falls below/above the level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDeficit {
    pub level: f64,
    pub upper_deficit: f64,
    pub lower_deficit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiconcavityReport {
    pub levels: Vec<LevelDeficit>,
}

impl QuasiconcavityReport {
    pub fn worst_deficit(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.upper_deficit.max(l.lower_deficit))
            .fold(0.0, f64::max)
    }
}

/// For each level `t` in `(0, 1)`: the convex hull of the upper-half
/// nodes with `u >= t` must contain no node with `u < t`, and mirrored
/// with `u <= -t` on the lower half (quasiconvexity there). The deficit
/// is `max(0, t - u)` (resp. `max(0, u + t)`) over hull-contained nodes.
pub fn check_quasiconcavity(
    field: &ScalarField,
    levels: &[f64],
) -> Result<QuasiconcavityReport, AnalysisError> {
    require_2d(field)?;
    let grid = field.grid();
    let nodes: Vec<(Node, [f64; 2], f64)> = grid
        .live_nodes()
        .map(|n| (n, grid.node_coords(n), field.get(n)))
        .collect();

    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        if !(level > 0.0 && level < 1.0) {
            return Err(AnalysisError::BadLevel { level });
        }
        let upper_set: Vec<[f64; 2]> = nodes
            .iter()
            .filter(|(_, c, u)| c[1] > 0.0 && *u >= level)
            .map(|(_, c, _)| *c)
            .collect();
        if upper_set.is_empty() {
            return Err(AnalysisError::EmptyLevelSet { level });
        }
        let hull = convex_hull(&upper_set);
        let mut upper_deficit = 0.0f64;
        for (_, c, u) in &nodes {
            if c[1] > 0.0 && hull_contains(&hull, *c, HULL_TOL) {
                upper_deficit = upper_deficit.max(level - u);
            }
        }

        let lower_set: Vec<[f64; 2]> = nodes
            .iter()
            .filter(|(_, c, u)| c[1] < 0.0 && *u <= -level)
            .map(|(_, c, _)| *c)
            .collect();
        if lower_set.is_empty() {
            return Err(AnalysisError::EmptyLevelSet { level: -level });
        }
        let hull = convex_hull(&lower_set);
        let mut lower_deficit = 0.0f64;
        for (_, c, u) in &nodes {
            if c[1] < 0.0 && hull_contains(&hull, *c, HULL_TOL) {
                lower_deficit = lower_deficit.max(u + level);
            }
        }

        out.push(LevelDeficit {
            level,
            upper_deficit: upper_deficit.max(0.0),
            lower_deficit: lower_deficit.max(0.0),
        });
    }
    Ok(QuasiconcavityReport { levels: out })
}

/// Central-difference `du/dy` at the interior midplane nodes, which the
/// continuum theory requires to be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidplaneReport {
    pub checked: usize,
    pub violations: usize,
    /// Magnitude of the worst nonpositive derivative (0 when none).
    pub worst_violation: f64,
    pub min_derivative: f64,
}

pub fn check_midplane_gradient_sign(field: &ScalarField) -> Result<MidplaneReport, AnalysisError> {
    require_2d(field)?;
    let grid = field.grid();
    let n = grid.nodes_per_axis();
    let mid = (n + 1) / 2;
    let two_h = 2.0 * grid.spacing();
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut min_derivative = f64::INFINITY;
    for i in 2..n {
        let d = (field.get(Node::new(i, mid + 1)) - field.get(Node::new(i, mid - 1))) / two_h;
        checked += 1;
        min_derivative = min_derivative.min(d);
        if d <= 0.0 {
            violations += 1;
        }
    }
    Ok(MidplaneReport {
        checked,
        violations,
        worst_violation: (-min_derivative).max(0.0),
        min_derivative,
    })
}

/// Minimum central-difference gradient magnitude over interior nodes
/// outside a 2h-neighborhood of the constraint nodes; the continuum
/// extremal has a nonvanishing gradient away from the pinned points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientFloorReport {
    pub min_magnitude: f64,
    pub argmin: Node,
    pub threshold: f64,
    pub pass: bool,
    /// Set when the minimum vanishes identically (e.g. constant field).
    pub degenerate: bool,
}

pub fn check_nonvanishing_gradient(
    field: &ScalarField,
    constraints: &ConstraintSet,
    threshold: f64,
) -> Result<GradientFloorReport, AnalysisError> {
    require_2d(field)?;
    let grid = field.grid();
    let n = grid.nodes_per_axis();
    let two_h = 2.0 * grid.spacing();
    let exclusion = 2.0 * grid.spacing() * (1.0 + 1e-12);
    let mut min_magnitude = f64::INFINITY;
    let mut argmin = Node::new(1, 1);
    for i in 2..n {
        for j in 2..n {
            let node = Node::new(i, j);
            if constraints
                .entries()
                .iter()
                .any(|&(c, _)| node_distance(grid, node, c) <= exclusion)
            {
                continue;
            }
            let dx = (field.get(Node::new(i + 1, j)) - field.get(Node::new(i - 1, j))) / two_h;
            let dy = (field.get(Node::new(i, j + 1)) - field.get(Node::new(i, j - 1))) / two_h;
            let mag = (dx * dx + dy * dy).sqrt();
            if mag < min_magnitude {
                min_magnitude = mag;
                argmin = node;
            }
        }
    }
    Ok(GradientFloorReport {
        min_magnitude,
        argmin,
        threshold,
        pass: min_magnitude > threshold,
        degenerate: min_magnitude == 0.0,
    })
}

/// Fraction of the discrete p-Dirichlet energy carried by cells whose
/// anchor node lies outside the unit ball centered between the pinned
/// points. A strictly positive fraction exhibits the mechanism behind
/// the strict inequality between the sharp constant and the constants of
/// ball-averaged Morrey estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGapReport {
    pub total_energy: f64,
    pub outside_energy: f64,
    pub fraction_outside: f64,
    pub degenerate: bool,
}

pub fn morrey_estimate_gap(
    field: &ScalarField,
    params: &EnergyParams,
) -> Result<EnergyGapReport, AnalysisError> {
    let grid = field.grid();
    params.validate(grid.dim())?;
    field.check_finite()?;
    let n = grid.nodes_per_axis();
    let values = field.values();
    let mut total = 0.0f64;
    let mut outside = 0.0f64;
    match grid.dim() {
        1 => {
            for i in 0..n - 1 {
                let cell = energy_1d_raw(&values[i..=i + 1], params.p, params.smoothing_eps);
                total += cell;
                if grid.coord(i + 1).abs() > 1.0 {
                    outside += cell;
                }
            }
        }
        _ => {
            let eps = params.smoothing_eps;
            let eps2 = eps * eps;
            let eps_p = if eps > 0.0 { eps.powf(params.p) } else { 0.0 };
            for i in 1..n {
                for j in 1..n {
                    let idx = (i - 1) * n + (j - 1);
                    let d1 = values[idx + n] - values[idx];
                    let d2 = values[idx + 1] - values[idx];
                    let cell = pow_p_half(d1 * d1 + d2 * d2 + eps2, params.p) - eps_p;
                    total += cell;
                    let c = grid.node_coords(Node::new(i, j));
                    if c[0] * c[0] + c[1] * c[1] > 1.0 {
                        outside += cell;
                    }
                }
            }
        }
    }
    let degenerate = total == 0.0;
    Ok(EnergyGapReport {
        total_energy: total,
        outside_energy: outside,
        fraction_outside: if degenerate { 0.0 } else { outside / total },
        degenerate,
    })
}
