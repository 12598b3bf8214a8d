//! Planar convex hulls and containment queries for the level-set
//! convexity checks.

/// Convex hull of a planar point set by the monotone chain method.
/// Returns the hull in counterclockwise order without repeating the
/// first point; collinear boundary points are dropped. Degenerate sets
/// come back as-is: empty, a single point, or the two extremes of a
/// collinear set.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }

    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };

    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // A fully collinear set collapses to its two extremes.
    if lower.len() < 2 {
        return vec![pts[0], pts[pts.len() - 1]];
    }
    lower
}

/// Whether `q` lies inside (or within perpendicular distance `tol` of)
/// the convex hull. Hulls from [`convex_hull`]: counterclockwise, or a
/// degenerate point/segment.
pub fn hull_contains(hull: &[[f64; 2]], q: [f64; 2], tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => {
            let dx = q[0] - hull[0][0];
            let dy = q[1] - hull[0][1];
            (dx * dx + dy * dy).sqrt() <= tol
        }
        2 => segment_distance(&hull[0], &hull[1], &q) <= tol,
        _ => hull.iter().zip(hull.iter().cycle().skip(1)).all(|(a, b)| {
            let ex = b[0] - a[0];
            let ey = b[1] - a[1];
            let len = (ex * ex + ey * ey).sqrt();
            let cross = ex * (q[1] - a[1]) - ey * (q[0] - a[0]);
            cross >= -tol * len.max(f64::MIN_POSITIVE)
        }),
    }
}

fn segment_distance(a: &[f64; 2], b: &[f64; 2], q: &[f64; 2]) -> f64 {
    let ex = b[0] - a[0];
    let ey = b[1] - a[1];
    let len2 = ex * ex + ey * ey;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((q[0] - a[0]) * ex + (q[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
    };
    let px = a[0] + t * ex;
    let py = a[1] + t * ey;
    ((q[0] - px) * (q[0] - px) + (q[1] - py) * (q[1] - py)).sqrt()
}
