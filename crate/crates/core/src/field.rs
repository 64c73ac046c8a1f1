//! Snapshots, point clouds, training datasets, and field interpolation.

use crate::error::{Error, Result};
use crate::mesh::{Grid, CLAMP_TOL};

/// Row-major list of `len` points with `dim` coordinates each.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn zeros(len: usize, dim: usize) -> Self {
        Points { dim, data: vec![0.0; len * dim] }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "flat buffer of length {} is not a multiple of dim {dim}",
                data.len()
            )));
        }
        Ok(Points { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>], dim: usize) -> Result<Self> {
        let mut p = Points::zeros(0, dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::invalid("row length does not match dimension"));
            }
            p.push(r);
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim);
        self.data.extend_from_slice(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Arithmetic mean of the points.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for p in self.iter() {
            for k in 0..self.dim {
                c[k] += p[k];
            }
        }
        let n = self.len().max(1) as f64;
        for v in &mut c {
            *v /= n;
        }
        c
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Euclidean distance between two coordinate slices.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A field sampled on a grid's nodes, tagged with its parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub parameter: Vec<f64>,
    /// Row-major `[n_nodes x n_components]` nodal values.
    values: Vec<f64>,
    n_components: usize,
    pub component_names: Vec<String>,
}

impl Snapshot {
    pub fn new(
        parameter: Vec<f64>,
        values: Vec<f64>,
        n_components: usize,
        component_names: Vec<String>,
    ) -> Result<Self> {
        if n_components == 0 || values.len() % n_components != 0 {
            return Err(Error::invalid("snapshot value buffer does not match component count"));
        }
        if component_names.len() != n_components {
            return Err(Error::invalid("component name count does not match component count"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("snapshot values must be finite"));
        }
        Ok(Snapshot { parameter, values, n_components, component_names })
    }

    /// Single-component snapshot named `u`.
    pub fn scalar(parameter: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Snapshot::new(parameter, values, 1, vec!["u".to_string()])
    }

    pub fn n_rows(&self) -> usize {
        self.values.len() / self.n_components
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_components..(i + 1) * self.n_components]
    }

    /// Nodal values of one component.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.n_components).copied().collect()
    }
}

/// Unordered raw sensor points extracted from one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Points,
}

impl PointCloud {
    pub fn new(points: Points) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

/// Template-ordered point cloud of fixed size, comparable across snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedPointCloud {
    pub points: Points,
    /// Training index of the template cloud this cloud was matched against.
    pub template_id: usize,
}

impl SortedPointCloud {
    pub fn new(points: Points, template_id: usize) -> Result<Self> {
        if !points.all_finite() {
            return Err(Error::invalid("sorted point cloud has non-finite coordinates"));
        }
        Ok(SortedPointCloud { points, template_id })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

/// The training dataset: distinct parameters, one snapshot each, and the
/// sorted clouds filled in by the offline pipeline.
#[derive(Debug, Clone)]
pub struct TrainingDataset {
    grid: Grid,
    parameters: Points,
    snapshots: Vec<Snapshot>,
    pub sorted_clouds: Option<Vec<SortedPointCloud>>,
}

impl TrainingDataset {
    pub fn new(grid: Grid, snapshots: Vec<Snapshot>) -> Result<Self> {
        let param_dim = snapshots.first().map_or(1, |s| s.parameter.len());
        let mut parameters = Points::zeros(0, param_dim.max(1));
        for s in &snapshots {
            if s.parameter.len() != param_dim {
                return Err(Error::invalid("snapshots carry parameters of mixed dimension"));
            }
            if s.n_rows() != grid.n_nodes() {
                return Err(Error::invalid(format!(
                    "snapshot has {} rows but grid has {} nodes",
                    s.n_rows(),
                    grid.n_nodes()
                )));
            }
            parameters.push(&s.parameter);
        }
        for i in 0..parameters.len() {
            for j in i + 1..parameters.len() {
                if euclidean(parameters.get(i), parameters.get(j)) == 0.0 {
                    return Err(Error::invalid(format!("parameters {i} and {j} coincide")));
                }
            }
        }
        Ok(TrainingDataset { grid, parameters, snapshots, sorted_clouds: None })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn parameters(&self) -> &Points {
        &self.parameters
    }

    pub fn snapshot(&self, k: usize) -> &Snapshot {
        &self.snapshots[k]
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Diameter of the training parameter set.
    pub fn parameter_diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.parameters.len() {
            for j in i + 1..self.parameters.len() {
                d = d.max(euclidean(self.parameters.get(i), self.parameters.get(j)));
            }
        }
        d
    }
}

/// Piecewise-linear interpolation of nodal values at arbitrary points.
///
/// `values` is row-major `[n_nodes x n_components]`. Query points may sit up
/// to [`CLAMP_TOL`] outside the domain; they are clamped to the boundary.
/// Inside each cell the result is a convex combination of that cell's nodal
/// values, and at a grid node the nodal value is reproduced exactly.
pub fn interpolate_values(
    grid: &Grid,
    values: &[f64],
    n_components: usize,
    query_points: &Points,
) -> Result<Vec<f64>> {
    if values.len() != grid.n_nodes() * n_components {
        return Err(Error::invalid("value buffer does not match grid size"));
    }
    if query_points.dim() != grid.dim() {
        return Err(Error::invalid("query dimension does not match grid dimension"));
    }
    let mut out = vec![0.0; query_points.len() * n_components];
    let mut x = vec![0.0; grid.dim()];
    for (m, q) in query_points.iter().enumerate() {
        let excess = grid.domain().exterior_distance(q);
        if excess > CLAMP_TOL {
            return Err(Error::OutsideDomain { point: q.to_vec(), excess });
        }
        x.copy_from_slice(q);
        grid.domain().project(&mut x);
        let st = grid.stencil(&x)?;
        let row = &mut out[m * n_components..(m + 1) * n_components];
        for k in 0..st.len {
            let w = st.weights[k];
            if w == 0.0 {
                continue;
            }
            let nodal = &values[st.nodes[k] * n_components..(st.nodes[k] + 1) * n_components];
            for (o, v) in row.iter_mut().zip(nodal) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

/// Interpolate a snapshot's field at `query_points`; returns `[M x D]`.
pub fn interpolate_field(snapshot: &Snapshot, grid: &Grid, query_points: &Points) -> Result<Vec<f64>> {
    interpolate_values(grid, snapshot.values(), snapshot.n_components(), query_points)
}
