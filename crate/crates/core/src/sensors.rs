//! Scalar testing functions that turn a snapshot into a raw point cloud of
//! coherent-structure markers.
//!
//! Three sensor kinds are supported: the Ducros shock sensor for compressible
//! flow fields, the streamfunction sign for recirculation areas in channel
//! flows, and a user-supplied analytic level set for synthetic ground truth.

use crate::error::{Error, Result};
use crate::field::{PointCloud, Points, Snapshot};
use crate::mesh::{Grid, GridSpec};

/// Sensor selection and thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig {
    pub kind: SensorKind,
    /// Quantile level for the extraction threshold.
    pub gamma_thr: f64,
    /// Pressure floor in the Ducros sensor denominator.
    pub epsilon_ducros: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Ducros,
    Streamfunction,
    AnalyticLevelset,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig { kind: SensorKind::Ducros, gamma_thr: 0.996, epsilon_ducros: 0.01 }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_thr > 0.0 && self.gamma_thr < 1.0) {
            return Err(Error::invalid(format!("gamma_thr must lie in (0,1), got {}", self.gamma_thr)));
        }
        if self.epsilon_ducros <= 0.0 {
            return Err(Error::invalid("epsilon_ducros must be positive"));
        }
        Ok(())
    }
}

/// Flow quantities and their spatial derivatives, evaluated at a common set
/// of sample points.
#[derive(Debug, Clone)]
pub struct FlowFields {
    /// Velocity, row-major `[n x d]`.
    pub velocity: Points,
    pub pressure: Vec<f64>,
    pub sound_speed: Vec<f64>,
    pub divergence: Vec<f64>,
    /// Scalar curl (2D) or zero (1D).
    pub curl: Vec<f64>,
    /// Pressure gradient, row-major `[n x d]`.
    pub pressure_gradient: Points,
}

impl FlowFields {
    pub fn len(&self) -> usize {
        self.pressure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pressure.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.velocity.len() != n
            || self.sound_speed.len() != n
            || self.divergence.len() != n
            || self.curl.len() != n
            || self.pressure_gradient.len() != n
        {
            return Err(Error::invalid("flow field arrays have mismatched lengths"));
        }
        if self.pressure.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::invalid("pressure must be positive everywhere"));
        }
        if self.sound_speed.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::invalid("sound speed must be positive everywhere"));
        }
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Ducros shock indicator at one sample point:
/// `phi = (-div v)^+ / sqrt(div^2 + |curl|^2 + a^2) * |grad p| / (p + eps) * |v|`.
///
/// Nonnegative; zero whenever the flow is locally non-compressive
/// (`div v >= 0`), the pressure gradient vanishes, or the velocity vanishes.
pub fn ducros_value(flow: &FlowFields, point_index: usize, epsilon: f64) -> f64 {
    let div = flow.divergence[point_index];
    let compression = (-div).max(0.0);
    let a = flow.sound_speed[point_index];
    let denom = (div * div + flow.curl[point_index].powi(2) + a * a).sqrt();
    let gp = norm(flow.pressure_gradient.get(point_index));
    let p = flow.pressure[point_index];
    let v = norm(flow.velocity.get(point_index));
    (compression / denom) * (gp / (p + epsilon)) * v
}

/// Ducros values at every sample point.
pub fn ducros_values(flow: &FlowFields, epsilon: f64) -> Result<Vec<f64>> {
    flow.validate()?;
    Ok((0..flow.len()).map(|i| ducros_value(flow, i, epsilon)).collect())
}

/// Per-cell sensor value: the maximum of `|values|` over each cell's sample
/// points. `cells[k]` lists the sample indices belonging to cell `k`.
pub fn cellwise_max(values_per_point: &[f64], cells: &[Vec<usize>]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cells.len());
    for (k, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            return Err(Error::invalid(format!("cell {k} has no sample points")));
        }
        let m = cell.iter().map(|&i| values_per_point[i].abs()).fold(f64::NEG_INFINITY, f64::max);
        out.push(m);
    }
    Ok(out)
}

/// Streamfunction on a structured channel grid: vertical trapezoidal
/// integrals of the horizontal velocity (component 0) from the bottom wall,
/// so the bottom boundary carries exactly zero.
pub fn streamfunction(snapshot: &Snapshot, grid: &Grid) -> Result<Vec<f64>> {
    let (nx, ny) = match grid.spec() {
        GridSpec::RectangleUniform { nx, ny, .. } => (*nx, *ny),
        _ => return Err(Error::invalid("streamfunction requires a structured rectangle grid")),
    };
    if snapshot.n_rows() != grid.n_nodes() {
        return Err(Error::invalid("snapshot does not match grid"));
    }
    let mut psi = vec![0.0; grid.n_nodes()];
    for i in 0..=nx {
        let mut acc = 0.0;
        psi[grid.node_index(i, 0)] = 0.0;
        for j in 1..=ny {
            let lower = grid.node_index(i, j - 1);
            let upper = grid.node_index(i, j);
            let dy = grid.nodes().get(upper)[1] - grid.nodes().get(lower)[1];
            let u_lower = snapshot.row(lower)[0];
            let u_upper = snapshot.row(upper)[0];
            acc += 0.5 * dy * (u_lower + u_upper);
            psi[upper] = acc;
        }
    }
    Ok(psi)
}

/// Empirical quantile with the linear-interpolation convention: position
/// `(n - 1) * gamma` between order statistics.
pub fn quantile_threshold(values: &[f64], gamma_thr: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&gamma_thr) {
        return Err(Error::invalid(format!("quantile level {gamma_thr} outside [0,1]")));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("sensor values must not be NaN"));
    let pos = (sorted.len() - 1) as f64 * gamma_thr;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Keep exactly the points whose sensor value meets the threshold, in input
/// order.
pub fn extract_raw_cloud(sensor_values: &[f64], threshold: f64, points: &Points) -> Result<PointCloud> {
    if sensor_values.len() != points.len() {
        return Err(Error::invalid("sensor values and points are not aligned"));
    }
    let mut cloud = Points::zeros(0, points.dim());
    for (v, p) in sensor_values.iter().zip(points.iter()) {
        if *v >= threshold {
            cloud.push(p);
        }
    }
    Ok(PointCloud::new(cloud))
}

/// Central finite-difference flow derivatives on a structured rectangle grid
/// (one-sided second-order stencils at the boundary). The snapshot must carry
/// components `[v1, v2, p, a]` in that order. Used when no analytic
/// derivatives are available.
pub fn flow_fields_from_grid(snapshot: &Snapshot, grid: &Grid) -> Result<FlowFields> {
    let (nx, ny) = match grid.spec() {
        GridSpec::RectangleUniform { nx, ny, .. } => (*nx, *ny),
        _ => return Err(Error::invalid("finite-difference derivatives require a rectangle grid")),
    };
    if snapshot.n_components() != 4 {
        return Err(Error::invalid("flow snapshot must carry components [v1, v2, p, a]"));
    }
    let n = grid.n_nodes();
    let deriv = |comp: usize, axis: usize| -> Vec<f64> {
        let mut out = vec![0.0; n];
        let (na, nb) = if axis == 0 { (nx, ny) } else { (ny, nx) };
        let at = |i: usize, j: usize| -> usize {
            if axis == 0 {
                grid.node_index(i, j)
            } else {
                grid.node_index(j, i)
            }
        };
        for j in 0..=nb {
            for i in 0..=na {
                let node = at(i, j);
                let val = |ii: usize| snapshot.row(at(ii, j))[comp];
                let coord = |ii: usize| grid.nodes().get(at(ii, j))[axis];
                let d = if i == 0 {
                    let h = coord(1) - coord(0);
                    (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h)
                } else if i == na {
                    let h = coord(na) - coord(na - 1);
                    (3.0 * val(na) - 4.0 * val(na - 1) + val(na - 2)) / (2.0 * h)
                } else {
                    let h2 = coord(i + 1) - coord(i - 1);
                    (val(i + 1) - val(i - 1)) / h2
                };
                out[node] = d;
            }
        }
        out
    };
    let dv1_dx = deriv(0, 0);
    let dv1_dy = deriv(0, 1);
    let dv2_dx = deriv(1, 0);
    let dv2_dy = deriv(1, 1);
    let dp_dx = deriv(2, 0);
    let dp_dy = deriv(2, 1);
    let mut velocity = Points::zeros(0, 2);
    let mut pressure_gradient = Points::zeros(0, 2);
    let mut pressure = Vec::with_capacity(n);
    let mut sound_speed = Vec::with_capacity(n);
    let mut divergence = Vec::with_capacity(n);
    let mut curl = Vec::with_capacity(n);
    for i in 0..n {
        let row = snapshot.row(i);
        velocity.push(&[row[0], row[1]]);
        pressure.push(row[2]);
        sound_speed.push(row[3]);
        divergence.push(dv1_dx[i] + dv2_dy[i]);
        curl.push(dv2_dx[i] - dv1_dy[i]);
        pressure_gradient.push(&[dp_dx[i], dp_dy[i]]);
    }
    let flow = FlowFields { velocity, pressure, sound_speed, divergence, curl, pressure_gradient };
    flow.validate()?;
    Ok(flow)
}
