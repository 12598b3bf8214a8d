//! Grids, scalar fields, and constraint bookkeeping: the substrate every
//! other module operates on.
//!
//! A [`Grid`] is a uniform square lattice on `[-ell, ell]^n` (`n` in {1, 2})
//! with spacing `h = 1/k` and `N = 2*ell*k + 1` nodes per axis. Node indices
//! are 1-based throughout the public API, matching the convention
//! `x_i = -ell + (i-1)*h` for `i` in `{1, ..., N}`; internally values are
//! stored 0-based row-major. The boundary between the two conventions is
//! tested explicitly.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("spatial dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("ell must be >= 2 so the constraint points ±1 are interior, got {0}")]
    EllTooSmall(u32),
    #[error("k must be >= 1, got {0}")]
    BadSubdivisions(u32),
}

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("point {0:?} lies outside the grid domain")]
    OutOfDomain(Vec<f64>),
    #[error("field contains a non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("node ({0}, {1}) is out of range for this grid")]
    BadNode(usize, usize),
    #[error("fields live on different grids")]
    GridMismatch,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("constraint node ({0}, {1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("constraint nodes must be distinct")]
    DuplicateNode,
    #[error("prescribed values must be distinct (a nonconstant extremal needs alpha != beta)")]
    DuplicateValue,
    #[error("prescribed value {0} is not finite")]
    NonFiniteValue(f64),
}

/// A node index, 1-based on each axis. One-dimensional grids use `j = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub i: usize,
    pub j: usize,
}

impl Node {
    pub fn new(i: usize, j: usize) -> Self {
        Node { i, j }
    }
}

/// Uniform lattice on `[-ell, ell]^n` with spacing `h = 1/k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    ell: u32,
    k: u32,
    n_axis: usize,
    h: f64,
}

/// Builds a grid; `n` in {1, 2}, `ell >= 2`, `k >= 1`, so `N = 2*ell*k + 1`
/// and the points (0, ±1) (or ±1 for n = 1) are exact nodes.
pub fn make_grid(n: usize, ell: u32, k: u32) -> Result<Grid, GridError> {
    if n != 1 && n != 2 {
        return Err(GridError::BadDimension(n));
    }
    if ell < 2 {
        return Err(GridError::EllTooSmall(ell));
    }
    if k < 1 {
        return Err(GridError::BadSubdivisions(k));
    }
    let n_axis = 2 * (ell as usize) * (k as usize) + 1;
    Ok(Grid {
        n,
        ell,
        k,
        n_axis,
        h: 1.0 / f64::from(k),
    })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Nodes per axis, `N = 2*ell*k + 1`.
    pub fn nodes_per_axis(&self) -> usize {
        self.n_axis
    }

    /// Spacing `h = 1/k`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Total number of stored values: `N` for n = 1, `N^2` for n = 2.
    pub fn value_count(&self) -> usize {
        match self.n {
            1 => self.n_axis,
            _ => self.n_axis * self.n_axis,
        }
    }

    /// Coordinate of 1-based axis index `i`: `x_i = -ell + (i-1)*h`.
    pub fn coord(&self, i: usize) -> f64 {
        debug_assert!((1..=self.n_axis).contains(&i));
        -f64::from(self.ell) + (i as f64 - 1.0) * self.h
    }

    /// Inverse of [`Grid::coord`]: the 1-based axis index whose coordinate
    /// equals `x` up to round-off, or `None` when `x` is not a node.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = (x + f64::from(self.ell)) / self.h;
        let i = s.round() as isize + 1;
        if i < 1 || i > self.n_axis as isize {
            return None;
        }
        let i = i as usize;
        if (self.coord(i) - x).abs() <= 1e-9 * self.h {
            Some(i)
        } else {
            None
        }
    }

    /// Both coordinates of a node; for n = 1 the second component is 0.
    pub fn node_coords(&self, node: Node) -> [f64; 2] {
        match self.n {
            1 => [self.coord(node.i), 0.0],
            _ => [self.coord(node.i), self.coord(node.j)],
        }
    }

    pub fn contains_node(&self, node: Node) -> bool {
        let in_i = (1..=self.n_axis).contains(&node.i);
        match self.n {
            1 => in_i && node.j == 1,
            _ => in_i && (1..=self.n_axis).contains(&node.j),
        }
    }

    /// Flat 0-based storage offset of a 1-based node index.
    pub fn offset(&self, node: Node) -> usize {
        debug_assert!(self.contains_node(node));
        match self.n {
            1 => node.i - 1,
            _ => (node.i - 1) * self.n_axis + (node.j - 1),
        }
    }

    /// The corner node (N, N) that the 2D energy never references.
    /// One-dimensional grids have no such node.
    pub fn dead_corner(&self) -> Option<Node> {
        match self.n {
            1 => None,
            _ => Some(Node::new(self.n_axis, self.n_axis)),
        }
    }

    pub fn is_dead_corner(&self, node: Node) -> bool {
        self.dead_corner() == Some(node)
    }

    /// Iterates all nodes carrying a degree of freedom or a constraint,
    /// i.e. every node except the dead corner, in lexicographic order.
    pub fn live_nodes(&self) -> impl Iterator<Item = Node> + '_ {
        let n_axis = self.n_axis;
        let dim = self.n;
        (1..=n_axis).flat_map(move |i| {
            let js = if dim == 1 { 1..=1 } else { 1..=n_axis };
            js.filter_map(move |j| {
                let node = Node::new(i, j);
                if dim == 2 && i == n_axis && j == n_axis {
                    None
                } else {
                    Some(node)
                }
            })
        })
    }
}

/// Euclidean distance between two nodes of the same grid.
pub fn node_distance(grid: &Grid, a: Node, b: Node) -> f64 {
    let pa = grid.node_coords(a);
    let pb = grid.node_coords(b);
    if grid.dim() == 1 {
        (pa[0] - pb[0]).abs()
    } else {
        let dx = pa[0] - pb[0];
        let dy = pa[1] - pb[1];
        (dx * dx + dy * dy).sqrt()
    }
}

/// Node-indexed real values `v_{i,j} = v(x_i, y_j)`, row `i` along the x
/// axis, column `j` along the y axis. The 2D corner value `v_{N,N}` is
/// stored as 0 and never read by energy or gradient computations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.value_count()],
        }
    }

    /// Samples `f(x)` at every node of a 1D grid.
    pub fn from_fn_1d(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        assert_eq!(grid.dim(), 1, "from_fn_1d requires a 1D grid");
        let values = (1..=grid.nodes_per_axis())
            .map(|i| f(grid.coord(i)))
            .collect();
        ScalarField { grid, values }
    }

    /// Samples `f(x, y)` at every node of a 2D grid; the dead corner is
    /// stored as 0 regardless of `f`.
    pub fn from_fn_2d(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        assert_eq!(grid.dim(), 2, "from_fn_2d requires a 2D grid");
        let n = grid.nodes_per_axis();
        let mut values = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                if i == n && j == n {
                    values.push(0.0);
                } else {
                    values.push(f(grid.coord(i), grid.coord(j)));
                }
            }
        }
        ScalarField { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.value_count() {
            return Err(FieldError::GridMismatch);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, node: Node) -> f64 {
        self.values[self.grid.offset(node)]
    }

    pub fn set(&mut self, node: Node, value: f64) {
        let off = self.grid.offset(node);
        self.values[off] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Errors if any stored value is non-finite.
    pub fn check_finite(&self) -> Result<(), FieldError> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(idx) => Err(FieldError::NonFinite(idx)),
            None => Ok(()),
        }
    }

    /// Multilinear interpolation at a point of `[-ell, ell]^n`; exact at
    /// live nodes, affine-reproducing, errors outside the closed domain.
    ///
    /// In the top-right cell the dead corner's stored placeholder is not
    /// data; it is replaced by the parallelogram completion
    /// `v_{N,N-1} + v_{N-1,N} - v_{N-1,N-1}`, which keeps affine fields
    /// exact there.
    pub fn interpolate(&self, point: &[f64]) -> Result<f64, FieldError> {
        let ell = f64::from(self.grid.ell);
        for &c in point.iter().take(self.grid.n) {
            if !(-ell..=ell).contains(&c) {
                return Err(FieldError::OutOfDomain(point.to_vec()));
            }
        }
        let (c0, t0) = self.cell_and_fraction(point[0]);
        match self.grid.n {
            1 => {
                let a = self.values[c0];
                let b = self.values[c0 + 1];
                Ok(lerp(a, b, t0))
            }
            _ => {
                let (c1, t1) = self.cell_and_fraction(point[1]);
                let n = self.grid.n_axis;
                let v00 = self.values[c0 * n + c1];
                let v01 = self.values[c0 * n + c1 + 1];
                let v10 = self.values[(c0 + 1) * n + c1];
                let v11 = if c0 == n - 2 && c1 == n - 2 {
                    v10 + v01 - v00
                } else {
                    self.values[(c0 + 1) * n + c1 + 1]
                };
                let a = lerp(v00, v01, t1);
                let b = lerp(v10, v11, t1);
                Ok(lerp(a, b, t0))
            }
        }
    }

    /// 0-based cell origin and in-cell fraction for an in-domain coordinate.
    /// Snaps to exact node coordinates so interpolation is exact on nodes.
    fn cell_and_fraction(&self, x: f64) -> (usize, f64) {
        let n = self.grid.n_axis;
        let s = (x + f64::from(self.grid.ell)) / self.grid.h;
        let mut c = s.floor() as isize;
        c = c.clamp(0, n as isize - 2);
        let c = c as usize;
        let lo = self.grid.coord(c + 1);
        let hi = self.grid.coord(c + 2);
        if x == lo {
            (c, 0.0)
        } else if x == hi {
            (c, 1.0)
        } else {
            (c, (x - lo) / self.grid.h)
        }
    }
}

/// Endpoint-exact linear interpolation: returns `b` bitwise at `t = 1`
/// (the usual `a + t (b - a)` form does not).
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 1.0 {
        b
    } else {
        a + t * (b - a)
    }
}

/// Pinned nodes with prescribed values; the canonical 2D problem pins
/// node `(ell*k+1, (ell+1)*k+1)` to +1 and `(ell*k+1, (ell-1)*k+1)` to -1,
/// i.e. the points (0, 1) and (0, -1).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    entries: Vec<(Node, f64)>,
}

impl ConstraintSet {
    /// Validates ranges, node distinctness, and pairwise value distinctness.
    /// An empty set is allowed and constrains nothing.
    pub fn new(grid: &Grid, entries: Vec<(Node, f64)>) -> Result<Self, ConstraintError> {
        for (idx, &(node, value)) in entries.iter().enumerate() {
            if !grid.contains_node(node) || grid.is_dead_corner(node) {
                return Err(ConstraintError::OutOfRange(node.i, node.j));
            }
            if !value.is_finite() {
                return Err(ConstraintError::NonFiniteValue(value));
            }
            for &(other, other_value) in &entries[..idx] {
                if other == node {
                    return Err(ConstraintError::DuplicateNode);
                }
                if other_value == value {
                    return Err(ConstraintError::DuplicateValue);
                }
            }
        }
        Ok(ConstraintSet { entries })
    }

    /// The two-point constraints +1 at (0, 1) and -1 at (0, -1) for n = 2,
    /// or +1 at x = 1 and -1 at x = -1 for n = 1.
    pub fn canonical(grid: &Grid) -> Self {
        let ell = grid.ell() as usize;
        let k = grid.k() as usize;
        let entries = match grid.dim() {
            1 => vec![
                (Node::new((ell + 1) * k + 1, 1), 1.0),
                (Node::new((ell - 1) * k + 1, 1), -1.0),
            ],
            _ => {
                let mid = ell * k + 1;
                vec![
                    (Node::new(mid, (ell + 1) * k + 1), 1.0),
                    (Node::new(mid, (ell - 1) * k + 1), -1.0),
                ]
            }
        };
        ConstraintSet { entries }
    }

    /// Whether this set is exactly the canonical two-point constraint set.
    pub fn is_canonical(&self, grid: &Grid) -> bool {
        *self == Self::canonical(grid)
    }

    pub fn entries(&self) -> &[(Node, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_constrained(&self, node: Node) -> bool {
        self.entries.iter().any(|&(n, _)| n == node)
    }

    /// Writes the prescribed values into the field.
    pub fn apply(&self, field: &mut ScalarField) {
        for &(node, value) in &self.entries {
            field.set(node, value);
        }
    }
}
