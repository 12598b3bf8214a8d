//! Level-set extraction on 2D fields: marching squares with linear edge
//! interpolation, saddle cells disambiguated by the cell mean, and the
//! resulting segments chained into ordered polylines.
//!
//! Crossing points on an edge shared by two cells are computed from the
//! same node pair in the same order, so endpoints match bitwise and the
//! chaining can key on exact coordinates. The top-right cell substitutes
//! the parallelogram completion for the dead corner, matching
//! [`ScalarField::interpolate`].

use std::collections::HashMap;
use std::fmt::Write as _;

use morrey_core::{AnalysisError, ScalarField};

/// Ordered vertices of one contour component; closed loops repeat the
/// first vertex at the end.
pub type Polyline = Vec<[f64; 2]>;

/// Polylines for each requested level, in the requested order.
#[derive(Debug, Clone, PartialEq)]
pub struct Contours {
    pub levels: Vec<(f64, Vec<Polyline>)>,
}

/// One undirected contour segment inside a single cell.
type Segment = ([f64; 2], [f64; 2]);

/// Crossing of the edge from `(pa, va)` to `(pb, vb)` at `level`; the
/// caller guarantees the edge straddles the level, so `va != vb`.
fn crossing(pa: [f64; 2], va: f64, pb: [f64; 2], vb: f64, level: f64) -> [f64; 2] {
    let s = (level - va) / (vb - va);
    [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
}

/// Runs marching squares for one level over every cell.
fn level_segments(field: &ScalarField, level: f64) -> Vec<Segment> {
    let grid = field.grid();
    let n = grid.nodes_per_axis();
    let values = field.values();
    let at = |i: usize, j: usize| values[(i - 1) * n + (j - 1)];

    let mut segments = Vec::new();
    for i in 1..n {
        for j in 1..n {
            let v00 = at(i, j);
            let v10 = at(i + 1, j);
            let v01 = at(i, j + 1);
            // The dead corner stores a placeholder; complete the cell as
            // interpolation does.
            let v11 = if i == n - 1 && j == n - 1 {
                v10 + v01 - v00
            } else {
                at(i + 1, j + 1)
            };

            let inside = |v: f64| v >= level;
            let case = usize::from(inside(v00))
                | usize::from(inside(v10)) << 1
                | usize::from(inside(v11)) << 2
                | usize::from(inside(v01)) << 3;
            if case == 0 || case == 15 {
                continue;
            }

            let (x0, y0) = (grid.coord(i), grid.coord(j));
            let (x1, y1) = (grid.coord(i + 1), grid.coord(j + 1));
            let p00 = [x0, y0];
            let p10 = [x1, y0];
            let p01 = [x0, y1];
            let p11 = [x1, y1];
            // Edge crossings, each computed with the lower or left node
            // first so shared edges agree bitwise between cells.
            let bottom = || crossing(p00, v00, p10, v10, level);
            let top = || crossing(p01, v01, p11, v11, level);
            let left = || crossing(p00, v00, p01, v01, level);
            let right = || crossing(p10, v10, p11, v11, level);

            let mut push = |a: [f64; 2], b: [f64; 2]| {
                if a != b {
                    segments.push((a, b));
                }
            };
            match case {
                1 | 14 => push(left(), bottom()),
                2 | 13 => push(bottom(), right()),
                3 | 12 => push(left(), right()),
                4 | 11 => push(top(), right()),
                6 | 9 => push(bottom(), top()),
                7 | 8 => push(left(), top()),
                5 => {
                    // Corners 00 and 11 are inside; the cell mean decides
                    // whether they connect through the center.
                    if (v00 + v10 + v01 + v11) / 4.0 >= level {
                        push(left(), top());
                        push(bottom(), right());
                    } else {
                        push(left(), bottom());
                        push(top(), right());
                    }
                }
                10 => {
                    // Mirror image: corners 10 and 01 inside.
                    if (v00 + v10 + v01 + v11) / 4.0 >= level {
                        push(left(), bottom());
                        push(top(), right());
                    } else {
                        push(left(), top());
                        push(bottom(), right());
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    segments
}

fn point_key(p: [f64; 2]) -> (u64, u64) {
    (p[0].to_bits(), p[1].to_bits())
}

/// Chains segments into polylines by exact endpoint matching. Seeds scan
/// in cell order and continuations take the lowest-index candidate, so
/// the result is deterministic.
fn chain_segments(segments: &[Segment]) -> Vec<Polyline> {
    let mut at_point: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        at_point.entry(point_key(*a)).or_default().push(idx);
        at_point.entry(point_key(*b)).or_default().push(idx);
    }

    let mut used = vec![false; segments.len()];
    let take_next = |used: &mut Vec<bool>, endpoint: [f64; 2]| -> Option<[f64; 2]> {
        let candidates = at_point.get(&point_key(endpoint))?;
        let idx = *candidates.iter().find(|idx| !used[**idx])?;
        used[idx] = true;
        let (a, b) = segments[idx];
        Some(if point_key(a) == point_key(endpoint) {
            b
        } else {
            a
        })
    };

    let mut polylines = Vec::new();
    for seed in 0..segments.len() {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        let (a, b) = segments[seed];
        let mut chain = vec![a, b];
        // Grow past the back until the loop closes or the end is bare.
        while point_key(chain[0]) != point_key(*chain.last().unwrap()) {
            match take_next(&mut used, *chain.last().unwrap()) {
                Some(next) => chain.push(next),
                None => break,
            }
        }
        // If still open, grow past the front.
        if point_key(chain[0]) != point_key(*chain.last().unwrap()) {
            chain.reverse();
            while let Some(next) = take_next(&mut used, *chain.last().unwrap()) {
                chain.push(next);
                if point_key(chain[0]) == point_key(*chain.last().unwrap()) {
                    break;
                }
            }
            chain.reverse();
        }
        polylines.push(chain);
    }
    polylines
}

/// Extracts the contour polylines of a 2D field at one level.
pub fn extract_level(field: &ScalarField, level: f64) -> Result<Vec<Polyline>, AnalysisError> {
    if field.grid().dim() != 2 {
        return Err(AnalysisError::NotTwoDimensional);
    }
    field.check_finite()?;
    if !level.is_finite() {
        return Err(AnalysisError::BadLevel { level });
    }
    Ok(chain_segments(&level_segments(field, level)))
}

/// Extracts contours for every requested level, preserving order. Levels
/// the field never reaches produce empty sections, not errors.
pub fn extract_contours(field: &ScalarField, levels: &[f64]) -> Result<Contours, AnalysisError> {
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        out.push((level, extract_level(field, level)?));
    }
    Ok(Contours { levels: out })
}

/// Renders contours as structured text: a `level` line, then one
/// `polyline <count>` header per component followed by its vertices.
pub fn render_contours(contours: &Contours) -> String {
    let mut out = String::from("morrey contours v1\n");
    for (level, polylines) in &contours.levels {
        let _ = writeln!(out, "level {level}");
        for polyline in polylines {
            let _ = writeln!(out, "polyline {}", polyline.len());
            for vertex in polyline {
                let _ = writeln!(out, "{} {}", vertex[0], vertex[1]);
            }
        }
    }
    out
}
