//! Computational domains and spatial discretizations.
//!
//! Three domain shapes are supported: an interval in 1D, an axis-aligned
//! rectangle, and a disk. Grids are generated structurally (uniform segments,
//! structured quads, polar-mapped triangles) and carry per-boundary-node
//! outward normals and tangents. Point location uses direct index arithmetic
//! on structured grids and a uniform-bin locator on triangulations.

use crate::error::{Error, Result};
use crate::field::Points;

/// Tolerance (in domain units) within which an exterior query point is
/// clamped to the boundary instead of rejected.
pub const CLAMP_TOL: f64 = 1e-12;

/// An open computational domain in one or two space dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("interval bounds not ordered: [{a}, {b}]")));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        for k in 0..2 {
            if !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k]) {
                return Err(Error::invalid(format!(
                    "rectangle bounds not ordered on axis {k}: [{}, {}]",
                    lo[k], hi[k]
                )));
            }
        }
        Ok(Domain::Rectangle { lo, hi })
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Domain::Disk { center, radius })
    }

    /// Spatial dimension (1 or 2).
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Distance from `x` to the closure of the domain (zero inside).
    pub fn exterior_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Interval { a, b } => (a - x[0]).max(x[0] - b).max(0.0),
            Domain::Rectangle { lo, hi } => {
                let mut d2 = 0.0;
                for k in 0..2 {
                    let d = (lo[k] - x[k]).max(x[k] - hi[k]).max(0.0);
                    d2 += d * d;
                }
                d2.sqrt()
            }
            Domain::Disk { center, radius } => {
                let r = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
                (r - radius).max(0.0)
            }
        }
    }

    /// Whether `x` lies in the closure, allowing `tol` of exterior slack.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.exterior_distance(x) <= tol
    }

    /// Orthogonal projection onto the closure; exterior points land on the
    /// boundary, interior points are untouched.
    pub fn project(&self, x: &mut [f64]) {
        match self {
            Domain::Interval { a, b } => x[0] = x[0].clamp(*a, *b),
            Domain::Rectangle { lo, hi } => {
                for k in 0..2 {
                    x[k] = x[k].clamp(lo[k], hi[k]);
                }
            }
            Domain::Disk { center, radius } => {
                let dx = [x[0] - center[0], x[1] - center[1]];
                let r = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
                if r > *radius {
                    let scale = radius / r;
                    x[0] = center[0] + dx[0] * scale;
                    x[1] = center[1] + dx[1] * scale;
                }
            }
        }
    }

    /// Distance from `x` to the boundary of the domain.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Interval { a, b } => (x[0] - a).abs().min((x[0] - b).abs()),
            Domain::Rectangle { lo, hi } => {
                let out = self.exterior_distance(x);
                if out > 0.0 {
                    return out;
                }
                let mut d = f64::INFINITY;
                for k in 0..2 {
                    d = d.min((x[k] - lo[k]).abs()).min((hi[k] - x[k]).abs());
                }
                d
            }
            Domain::Disk { center, radius } => {
                let r = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
                (r - radius).abs()
            }
        }
    }

    /// Axis-aligned bounding box, returned as (lo, hi) with `dim` entries used.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Domain::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Domain::Rectangle { lo, hi } => (*lo, *hi),
            Domain::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
        }
    }

    /// Characteristic length (diameter of the bounding box).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        match self.dim() {
            1 => hi[0] - lo[0],
            _ => ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt(),
        }
    }

    /// `n` points distributed along the boundary, for verification sweeps.
    pub fn boundary_samples(&self, n: usize) -> Points {
        let mut pts = Points::zeros(0, self.dim());
        match self {
            Domain::Interval { a, b } => {
                pts.push(&[*a]);
                pts.push(&[*b]);
            }
            Domain::Rectangle { lo, hi } => {
                let per_side = n.div_ceil(4).max(2);
                for k in 0..per_side {
                    let t = k as f64 / (per_side - 1) as f64;
                    let x = lo[0] + t * (hi[0] - lo[0]);
                    let y = lo[1] + t * (hi[1] - lo[1]);
                    pts.push(&[x, lo[1]]);
                    pts.push(&[x, hi[1]]);
                    pts.push(&[lo[0], y]);
                    pts.push(&[hi[0], y]);
                }
            }
            Domain::Disk { center, radius } => {
                let m = n.max(4);
                for k in 0..m {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    pts.push(&[center[0] + radius * th.cos(), center[1] + radius * th.sin()]);
                }
            }
        }
        pts
    }
}

/// Cell connectivity of a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    Segments(Vec<[usize; 2]>),
    Quads(Vec<[usize; 4]>),
    Triangles(Vec<[usize; 3]>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Segments(c) => c.len(),
            Cells::Quads(c) => c.len(),
            Cells::Triangles(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node indices of cell `k`.
    pub fn nodes_of(&self, k: usize) -> &[usize] {
        match self {
            Cells::Segments(c) => &c[k],
            Cells::Quads(c) => &c[k],
            Cells::Triangles(c) => &c[k],
        }
    }
}

/// Outward unit normal and tangent attached to a boundary node. Corner nodes
/// of a rectangle appear once per incident face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub node: usize,
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
}

/// Generator descriptor for a grid; persisted instead of raw connectivity so
/// that reload regenerates bit-identical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    IntervalUniform { a: f64, b: f64, n_nodes: usize },
    RectangleUniform { lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize },
    DiskPolar { center: [f64; 2], radius: f64, n_r: usize, n_theta: usize },
}

/// Interpolation stencil: up to four node indices with convex weights.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub nodes: [usize; 4],
    pub weights: [f64; 4],
    pub len: usize,
}

/// A spatial discretization of a [`Domain`].
#[derive(Debug, Clone)]
pub struct Grid {
    spec: GridSpec,
    domain: Domain,
    nodes: Points,
    cells: Cells,
    boundary: Vec<BoundaryNode>,
    locator: Option<BinLocator>,
}

impl Grid {
    /// Uniform 1D grid with `n_nodes` nodes on `[a, b]`.
    pub fn interval_uniform(a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        let domain = Domain::interval(a, b)?;
        if n_nodes < 2 {
            return Err(Error::invalid("interval grid needs at least 2 nodes"));
        }
        let h = (b - a) / (n_nodes - 1) as f64;
        let mut nodes = Points::zeros(0, 1);
        for i in 0..n_nodes {
            let x = if i + 1 == n_nodes { b } else { a + i as f64 * h };
            nodes.push(&[x]);
        }
        let cells = Cells::Segments((0..n_nodes - 1).map(|i| [i, i + 1]).collect());
        let boundary = vec![
            BoundaryNode { node: 0, normal: [-1.0, 0.0], tangent: [0.0, 0.0] },
            BoundaryNode { node: n_nodes - 1, normal: [1.0, 0.0], tangent: [0.0, 0.0] },
        ];
        Ok(Grid {
            spec: GridSpec::IntervalUniform { a, b, n_nodes },
            domain,
            nodes,
            cells,
            boundary,
            locator: None,
        })
    }

    /// Structured quad grid with `nx` by `ny` cells on an axis-aligned rectangle.
    pub fn rectangle_uniform(lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        let domain = Domain::rectangle(lo, hi)?;
        if nx < 1 || ny < 1 {
            return Err(Error::invalid("rectangle grid needs at least 1 cell per axis"));
        }
        let hx = (hi[0] - lo[0]) / nx as f64;
        let hy = (hi[1] - lo[1]) / ny as f64;
        let mut nodes = Points::zeros(0, 2);
        for j in 0..=ny {
            let y = if j == ny { hi[1] } else { lo[1] + j as f64 * hy };
            for i in 0..=nx {
                let x = if i == nx { hi[0] } else { lo[0] + i as f64 * hx };
                nodes.push(&[x, y]);
            }
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut quads = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                quads.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        let mut boundary = Vec::new();
        for i in 0..=nx {
            boundary.push(BoundaryNode { node: idx(i, 0), normal: [0.0, -1.0], tangent: [1.0, 0.0] });
            boundary.push(BoundaryNode { node: idx(i, ny), normal: [0.0, 1.0], tangent: [-1.0, 0.0] });
        }
        for j in 0..=ny {
            boundary.push(BoundaryNode { node: idx(0, j), normal: [-1.0, 0.0], tangent: [0.0, -1.0] });
            boundary.push(BoundaryNode { node: idx(nx, j), normal: [1.0, 0.0], tangent: [0.0, 1.0] });
        }
        Ok(Grid {
            spec: GridSpec::RectangleUniform { lo, hi, nx, ny },
            domain,
            nodes,
            cells: Cells::Quads(quads),
            boundary,
            locator: None,
        })
    }

    /// Polar-mapped triangulation of a disk with `n_r` rings and `n_theta`
    /// nodes per ring.
    pub fn disk_polar(center: [f64; 2], radius: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        let domain = Domain::disk(center, radius)?;
        if n_r < 1 || n_theta < 3 {
            return Err(Error::invalid("disk grid needs n_r >= 1 and n_theta >= 3"));
        }
        let mut nodes = Points::zeros(0, 2);
        nodes.push(&center);
        let mut angles = Vec::with_capacity(n_theta);
        for j in 0..n_theta {
            angles.push(2.0 * std::f64::consts::PI * j as f64 / n_theta as f64);
        }
        for k in 1..=n_r {
            let r = radius * k as f64 / n_r as f64;
            for th in &angles {
                nodes.push(&[center[0] + r * th.cos(), center[1] + r * th.sin()]);
            }
        }
        let ring = |k: usize, j: usize| 1 + (k - 1) * n_theta + (j % n_theta);
        let mut tris = Vec::new();
        for j in 0..n_theta {
            tris.push([0, ring(1, j), ring(1, j + 1)]);
        }
        for k in 1..n_r {
            for j in 0..n_theta {
                tris.push([ring(k, j), ring(k + 1, j), ring(k + 1, j + 1)]);
                tris.push([ring(k, j), ring(k + 1, j + 1), ring(k, j + 1)]);
            }
        }
        let mut boundary = Vec::with_capacity(n_theta);
        for (j, th) in angles.iter().enumerate() {
            boundary.push(BoundaryNode {
                node: ring(n_r, j),
                normal: [th.cos(), th.sin()],
                tangent: [-th.sin(), th.cos()],
            });
        }
        let mut grid = Grid {
            spec: GridSpec::DiskPolar { center, radius, n_r, n_theta },
            domain,
            nodes,
            cells: Cells::Triangles(tris),
            boundary,
            locator: None,
        };
        grid.locator = Some(BinLocator::build(&grid));
        Ok(grid)
    }

    /// Regenerate a grid from its persisted descriptor.
    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        match *spec {
            GridSpec::IntervalUniform { a, b, n_nodes } => Self::interval_uniform(a, b, n_nodes),
            GridSpec::RectangleUniform { lo, hi, nx, ny } => Self::rectangle_uniform(lo, hi, nx, ny),
            GridSpec::DiskPolar { center, radius, n_r, n_theta } => {
                Self::disk_polar(center, radius, n_r, n_theta)
            }
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn nodes(&self) -> &Points {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn boundary(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    /// Cell counts per axis for structured rectangle grids.
    pub fn structured_dims(&self) -> Option<(usize, usize)> {
        match self.spec {
            GridSpec::RectangleUniform { nx, ny, .. } => Some((nx, ny)),
            _ => None,
        }
    }

    /// Node index `(i, j)` -> flat index on a structured rectangle grid.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        match self.spec {
            GridSpec::RectangleUniform { nx, .. } => j * (nx + 1) + i,
            _ => panic!("node_index is only defined on structured rectangle grids"),
        }
    }

    /// Interpolation stencil for a point inside the closure of the domain.
    /// The point must already be clamped; weights are convex and sum to one.
    pub fn stencil(&self, x: &[f64]) -> Result<Stencil> {
        match &self.spec {
            GridSpec::IntervalUniform { a, b, n_nodes } => {
                let n_cells = n_nodes - 1;
                let h = (b - a) / n_cells as f64;
                let mut i = (((x[0] - a) / h).floor() as isize).clamp(0, n_cells as isize - 1) as usize;
                // Land on the lower cell when x sits exactly on an interior node.
                if x[0] < self.nodes.get(i)[0] && i > 0 {
                    i -= 1;
                }
                let xi = self.nodes.get(i)[0];
                let xj = self.nodes.get(i + 1)[0];
                let t = ((x[0] - xi) / (xj - xi)).clamp(0.0, 1.0);
                Ok(convex2(i, i + 1, 1.0 - t, t))
            }
            GridSpec::RectangleUniform { lo, hi, nx, ny } => {
                let hx = (hi[0] - lo[0]) / *nx as f64;
                let hy = (hi[1] - lo[1]) / *ny as f64;
                let mut i = (((x[0] - lo[0]) / hx).floor() as isize).clamp(0, *nx as isize - 1) as usize;
                let mut j = (((x[1] - lo[1]) / hy).floor() as isize).clamp(0, *ny as isize - 1) as usize;
                if x[0] < self.nodes.get(self.node_index(i, j))[0] && i > 0 {
                    i -= 1;
                }
                if x[1] < self.nodes.get(self.node_index(i, j))[1] && j > 0 {
                    j -= 1;
                }
                let p00 = self.node_index(i, j);
                let p10 = self.node_index(i + 1, j);
                let p01 = self.node_index(i, j + 1);
                let p11 = self.node_index(i + 1, j + 1);
                let x0 = self.nodes.get(p00);
                let x1 = self.nodes.get(p11);
                let s = ((x[0] - x0[0]) / (x1[0] - x0[0])).clamp(0.0, 1.0);
                let t = ((x[1] - x0[1]) / (x1[1] - x0[1])).clamp(0.0, 1.0);
                let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t];
                let sum = w[0] + w[1] + w[2] + w[3];
                Ok(Stencil {
                    nodes: [p00, p10, p01, p11],
                    weights: [w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum],
                    len: 4,
                })
            }
            GridSpec::DiskPolar { .. } => {
                let locator = self.locator.as_ref().expect("disk grids carry a locator");
                let cell = locator.locate(self, x).ok_or_else(|| Error::OutsideDomain {
                    point: x.to_vec(),
                    excess: self.domain.exterior_distance(x),
                })?;
                let tri = match &self.cells {
                    Cells::Triangles(t) => t[cell],
                    _ => unreachable!(),
                };
                let (wa, wb, wc) = barycentric(self.nodes.get(tri[0]), self.nodes.get(tri[1]), self.nodes.get(tri[2]), x);
                let mut w = [wa.max(0.0), wb.max(0.0), wc.max(0.0), 0.0];
                let sum = w[0] + w[1] + w[2];
                for v in w.iter_mut().take(3) {
                    *v /= sum;
                }
                Ok(Stencil { nodes: [tri[0], tri[1], tri[2], 0], weights: w, len: 3 })
            }
        }
    }
}

fn convex2(i: usize, j: usize, wi: f64, wj: f64) -> Stencil {
    Stencil { nodes: [i, j, 0, 0], weights: [wi, wj, 0.0, 0.0], len: 2 }
}

/// Barycentric coordinates of `x` in triangle `(a, b, c)`.
fn barycentric(a: &[f64], b: &[f64], c: &[f64], x: &[f64]) -> (f64, f64, f64) {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let wb = ((x[0] - a[0]) * (c[1] - a[1]) - (x[1] - a[1]) * (c[0] - a[0])) / det;
    let wc = ((b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0])) / det;
    (1.0 - wb - wc, wb, wc)
}

/// Uniform-bin point locator over a triangulation.
#[derive(Debug, Clone)]
struct BinLocator {
    lo: [f64; 2],
    inv_h: [f64; 2],
    n: [usize; 2],
    bins: Vec<Vec<u32>>,
}

impl BinLocator {
    fn build(grid: &Grid) -> Self {
        let (lo, hi) = grid.domain.bounding_box();
        let n_cells = grid.cells.len();
        let per_axis = ((n_cells as f64).sqrt().ceil() as usize).clamp(4, 256);
        let n = [per_axis, per_axis];
        let h = [(hi[0] - lo[0]) / n[0] as f64, (hi[1] - lo[1]) / n[1] as f64];
        let mut bins = vec![Vec::new(); n[0] * n[1]];
        let tris = match &grid.cells {
            Cells::Triangles(t) => t,
            _ => panic!("bin locator requires triangles"),
        };
        for (ci, tri) in tris.iter().enumerate() {
            let (mut blo, mut bhi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &v in tri {
                let p = grid.nodes.get(v);
                for k in 0..2 {
                    blo[k] = blo[k].min(p[k]);
                    bhi[k] = bhi[k].max(p[k]);
                }
            }
            // Pad so that points in the sagitta layer between a boundary
            // chord and the circular arc still find their triangle.
            for k in 0..2 {
                let pad = 0.2 * (bhi[k] - blo[k]).max(1e-3 * (hi[k] - lo[k]));
                blo[k] -= pad;
                bhi[k] += pad;
            }
            let i0 = Self::bin_of(blo[0], lo[0], h[0], n[0]);
            let i1 = Self::bin_of(bhi[0], lo[0], h[0], n[0]);
            let j0 = Self::bin_of(blo[1], lo[1], h[1], n[1]);
            let j1 = Self::bin_of(bhi[1], lo[1], h[1], n[1]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    bins[j * n[0] + i].push(ci as u32);
                }
            }
        }
        BinLocator { lo, inv_h: [1.0 / h[0], 1.0 / h[1]], n, bins }
    }

    fn bin_of(x: f64, lo: f64, h: f64, n: usize) -> usize {
        (((x - lo) / h).floor() as isize).clamp(0, n as isize - 1) as usize
    }

    fn locate(&self, grid: &Grid, x: &[f64]) -> Option<usize> {
        let i = (((x[0] - self.lo[0]) * self.inv_h[0]).floor() as isize).clamp(0, self.n[0] as isize - 1) as usize;
        let j = (((x[1] - self.lo[1]) * self.inv_h[1]).floor() as isize).clamp(0, self.n[1] as isize - 1) as usize;
        let tris = match &grid.cells {
            Cells::Triangles(t) => t,
            _ => return None,
        };
        let mut best: Option<(usize, f64)> = None;
        for &ci in &self.bins[j * self.n[0] + i] {
            let tri = tris[ci as usize];
            let (wa, wb, wc) = barycentric(grid.nodes.get(tri[0]), grid.nodes.get(tri[1]), grid.nodes.get(tri[2]), x);
            let min_w = wa.min(wb).min(wc);
            if min_w >= -1e-12 {
                return Some(ci as usize);
            }
            if best.map_or(true, |(_, m)| min_w > m) {
                best = Some((ci as usize, min_w));
            }
        }
        // Points in the sagitta layer between a boundary chord and the
        // circular arc sit slightly outside every triangle; fall back to the
        // least-violating one (its clamped weights evaluate at the nearest
        // polygon point).
        best.filter(|&(_, m)| m > -0.1).map(|(c, _)| c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_bounds() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::rectangle([0.0, 0.0], [1.0, 0.0]).is_err());
        assert!(Domain::disk([0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn rectangle_normals_are_axis_aligned() {
        let grid = Grid::rectangle_uniform([0.0, 0.0], [2.0, 1.0], 4, 3).unwrap();
        for bn in grid.boundary() {
            let n = bn.normal;
            let is_axis = (n[0].abs() == 1.0 && n[1] == 0.0) || (n[1].abs() == 1.0 && n[0] == 0.0);
            assert!(is_axis, "normal {:?} not axis-aligned", n);
            assert_relative_eq!(n[0] * n[0] + n[1] * n[1], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn disk_normals_are_radial() {
        let center = [0.5, -0.25];
        let radius = 2.0;
        let grid = Grid::disk_polar(center, radius, 6, 24).unwrap();
        for bn in grid.boundary() {
            let x = grid.nodes().get(bn.node);
            let expected = [(x[0] - center[0]) / radius, (x[1] - center[1]) / radius];
            assert_relative_eq!(bn.normal[0], expected[0], epsilon = 1e-12);
            assert_relative_eq!(bn.normal[1], expected[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn all_nodes_inside_closure() {
        for grid in [
            Grid::interval_uniform(-1.0, 1.0, 11).unwrap(),
            Grid::rectangle_uniform([0.0, 0.0], [1.0, 1.0], 5, 5).unwrap(),
            Grid::disk_polar([0.0, 0.0], 1.0, 5, 16).unwrap(),
        ] {
            for i in 0..grid.n_nodes() {
                assert!(grid.domain().contains(grid.nodes().get(i), 1e-12));
            }
        }
    }

    #[test]
    fn stencil_weights_are_convex() {
        let grid = Grid::disk_polar([0.0, 0.0], 1.0, 8, 32).unwrap();
        let mut x = [0.3, -0.4];
        grid.domain().project(&mut x);
        let st = grid.stencil(&x).unwrap();
        let mut sum = 0.0;
        for k in 0..st.len {
            assert!(st.weights[k] >= 0.0);
            sum += st.weights[k];
        }
        assert_relative_eq!(sum, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn projection_lands_inside() {
        let d = Domain::disk([1.0, 1.0], 0.5).unwrap();
        let mut x = [3.0, 1.0];
        d.project(&mut x);
        assert!(d.exterior_distance(&x) <= 1e-15);
        assert_relative_eq!(x[0], 1.5, epsilon = 1e-15);
    }
}
