//! Boundary-preserving deformation maps between predicted point clouds.
//!
//! Two constructions are available: an elasticity-based method (affine PSR
//! displacement, penalized vector-elliptic solve on a background grid, flow
//! integration) and an optimization-based method (polynomial expansion with
//! boundary-compatible basis functions and a Jacobian barrier). A dedicated
//! exact piecewise-linear path covers interval domains. Equal clouds
//! short-circuit to the identity map without any solve.

mod elasticity;
mod flow;
mod map1d;
mod optimize;
mod tube;

pub use elasticity::solve_penalized_elasticity;
pub use flow::{flow_map, VelocityField};
pub use map1d::PiecewiseLinearMap;
pub use optimize::{optimization_registration, BoundaryBasis};
pub use tube::tube_indicator;

use crate::error::{Error, Result};
use crate::field::{euclidean, PointCloud, Points, SortedPointCloud};
use crate::mesh::{Domain, Grid};
use crate::psr::{gaussian_mle, ot_gaussian_map, SubdomainMasks};
use nalgebra::DVector;

/// Which construction `build_registration` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegistrationMethod {
    Elasticity,
    Optimization,
    PiecewiseLinear1d,
}

/// Hyperparameters of the registration step.
#[derive(Debug, Clone)]
pub struct RegistrationConfig {
    pub method: RegistrationMethod,
    /// Penalization strength in the elliptic solve.
    pub epsilon: f64,
    /// Regularization scale of the signed-distance smoothing.
    pub delta: f64,
    /// Tube radius around cloud points.
    pub eta: f64,
    /// Flow time step; the flow runs over unit time.
    pub dt: f64,
    /// Background grid cells per axis for the elasticity solve.
    pub resolution: usize,
    /// Polynomial order per axis of the optimization search space.
    pub basis_size: usize,
    /// Weight of the bijectivity/smoothness penalty in the optimization.
    pub penalty_weight: f64,
    /// Optional per-structure masks; displacements are blended with
    /// partition-of-unity weights proportional to each structure's tube
    /// indicator.
    pub masks: Option<SubdomainMasks>,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        RegistrationConfig {
            method: RegistrationMethod::Elasticity,
            epsilon: 1e-8,
            delta: 50.0,
            eta: 1e-2,
            dt: 5e-3,
            resolution: 32,
            basis_size: 4,
            penalty_weight: 1.0,
            masks: None,
        }
    }
}

impl RegistrationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("eta", self.eta),
            ("dt", self.dt),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("registration {name} must be positive")));
            }
        }
        if self.resolution < 4 {
            return Err(Error::invalid("background resolution must be at least 4"));
        }
        if self.basis_size == 0 {
            return Err(Error::invalid("basis size must be positive"));
        }
        Ok(())
    }
}

/// A discrete bijection of the domain.
#[derive(Debug, Clone)]
pub enum DeformationMap {
    /// Exact identity, returned when source and target clouds coincide.
    Identity,
    /// Forward-Euler flow of a velocity field over unit time.
    Flow { velocity: VelocityField, dt: f64, n_steps: usize },
    /// Identity plus a coefficient expansion in boundary-compatible basis
    /// functions.
    Expansion { basis: BoundaryBasis, coeffs: DVector<f64> },
    /// Exact piecewise-linear map on an interval.
    PiecewiseLinear1d(PiecewiseLinearMap),
}

impl DeformationMap {
    /// Map a single point; the image is projected into the closure of the
    /// domain (geometry tolerance of the discrete constructions).
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            DeformationMap::Identity => Ok(x.to_vec()),
            DeformationMap::Flow { velocity, dt, n_steps } => {
                let mut cur = x.to_vec();
                for _ in 0..*n_steps {
                    let v = velocity.eval(&cur)?;
                    for (c, vi) in cur.iter_mut().zip(&v) {
                        *c += dt * vi;
                    }
                    velocity.grid().domain().project(&mut cur);
                }
                Ok(cur)
            }
            DeformationMap::Expansion { basis, coeffs } => {
                let mut y = basis.apply(coeffs, x);
                basis.domain().project(&mut y);
                Ok(y)
            }
            DeformationMap::PiecewiseLinear1d(map) => Ok(vec![map.apply(x[0])]),
        }
    }

    pub fn map_points(&self, pts: &Points) -> Result<Points> {
        let mut out = Points::zeros(0, pts.dim());
        for p in pts.iter() {
            out.push(&self.apply(p)?);
        }
        Ok(out)
    }

    /// Central finite-difference estimate of `min det(grad Phi)` over a probe
    /// grid, used as a local-bijectivity diagnostic.
    pub fn jacobian_proxy(&self, domain: &Domain, n_probe: usize) -> Result<f64> {
        if let DeformationMap::Identity = self {
            return Ok(1.0);
        }
        let (lo, hi) = domain.bounding_box();
        let d = domain.dim();
        let h: f64 = 1e-5 * domain.diameter();
        let mut min_det = f64::INFINITY;
        let probes = probe_points(domain, n_probe);
        for p in probes.iter() {
            // Keep the FD stencil inside the closure.
            let mut ok = true;
            for k in 0..d {
                if p[k] - h < lo[k] || p[k] + h > hi[k] {
                    ok = false;
                }
            }
            if !ok || domain.exterior_distance(p) > 0.0 || domain.boundary_distance(p) < 2.0 * h {
                continue;
            }
            let mut jac = [[0.0f64; 2]; 2];
            for k in 0..d {
                let mut plus = p.to_vec();
                plus[k] += h;
                let mut minus = p.to_vec();
                minus[k] -= h;
                let fp = self.apply(&plus)?;
                let fm = self.apply(&minus)?;
                for r in 0..d {
                    jac[r][k] = (fp[r] - fm[r]) / (2.0 * h);
                }
            }
            let det = if d == 1 { jac[0][0] } else { jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0] };
            min_det = min_det.min(det);
        }
        Ok(min_det)
    }
}

fn probe_points(domain: &Domain, n: usize) -> Points {
    let (lo, hi) = domain.bounding_box();
    let d = domain.dim();
    let mut pts = Points::zeros(0, d);
    if d == 1 {
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            pts.push(&[lo[0] + t * (hi[0] - lo[0])]);
        }
    } else {
        for j in 0..n {
            for i in 0..n {
                let x = lo[0] + (i as f64 + 0.5) / n as f64 * (hi[0] - lo[0]);
                let y = lo[1] + (j as f64 + 0.5) / n as f64 * (hi[1] - lo[1]);
                if domain.exterior_distance(&[x, y]) == 0.0 {
                    pts.push(&[x, y]);
                }
            }
        }
    }
    pts
}

/// Registration quality numbers attached to every constructed map.
#[derive(Debug, Clone)]
pub struct RegistrationDiagnostics {
    /// `max_i |Phi(x_i) - y_i|` over the cloud pairs; the construction only
    /// guarantees approximate interpolation, so this is monitored, not
    /// asserted.
    pub max_cloud_mismatch: f64,
    /// Minimum Jacobian determinant seen on a probe grid, when available.
    pub min_jacobian: Option<f64>,
}

/// Build the deformation map sending the source cloud (approximately) onto
/// the target cloud while preserving the boundary of `domain`. Bitwise-equal
/// clouds return the exact identity without solving anything.
pub fn build_registration(
    source: &SortedPointCloud,
    target: &SortedPointCloud,
    domain: &Domain,
    config: &RegistrationConfig,
) -> Result<(DeformationMap, RegistrationDiagnostics)> {
    config.validate()?;
    if source.len() != target.len() {
        return Err(Error::invalid("registration requires clouds of equal size"));
    }
    if source.len() == 0 {
        return Err(Error::invalid("registration requires nonempty clouds"));
    }
    if source.points.as_slice() == target.points.as_slice() {
        return Ok((
            DeformationMap::Identity,
            RegistrationDiagnostics { max_cloud_mismatch: 0.0, min_jacobian: Some(1.0) },
        ));
    }
    let map = match (config.method, domain) {
        (RegistrationMethod::PiecewiseLinear1d, Domain::Interval { .. }) | (_, Domain::Interval { .. }) => {
            DeformationMap::PiecewiseLinear1d(map1d::from_clouds(source, target, domain)?)
        }
        (RegistrationMethod::Elasticity, _) => {
            let grid = background_grid(domain, config.resolution)?;
            let displacement = psr_displacement_field(source, target, &grid, config)?;
            let h = tube_indicator(&source.points, config.eta, config.delta, grid.nodes())?;
            let velocity = solve_penalized_elasticity(&displacement, &grid, config, &h)?;
            flow_map(velocity, config.dt)?
        }
        (RegistrationMethod::Optimization, _) => optimization_registration(
            &source.points,
            &target.points,
            domain,
            config.basis_size,
            config.penalty_weight,
        )?,
        (RegistrationMethod::PiecewiseLinear1d, _) => {
            return Err(Error::invalid("piecewise-linear registration requires an interval domain"));
        }
    };
    let mapped = map.map_points(&source.points)?;
    let mut mismatch = 0.0f64;
    for (m, t) in mapped.iter().zip(target.points.iter()) {
        mismatch = mismatch.max(euclidean(m, t));
    }
    let min_jacobian = match &map {
        DeformationMap::Expansion { .. } => Some(map.jacobian_proxy(domain, 16)?),
        DeformationMap::Flow { .. } => Some(map.jacobian_proxy(domain, 8)?),
        _ => Some(1.0),
    };
    Ok((map, RegistrationDiagnostics { max_cloud_mismatch: mismatch, min_jacobian }))
}

/// Background discretization used by the elasticity solve.
pub fn background_grid(domain: &Domain, resolution: usize) -> Result<Grid> {
    match domain {
        Domain::Interval { a, b } => Grid::interval_uniform(*a, *b, resolution + 1),
        Domain::Rectangle { lo, hi } => Grid::rectangle_uniform(*lo, *hi, resolution, resolution),
        Domain::Disk { center, radius } => {
            Grid::disk_polar(*center, *radius, (resolution / 2).max(4), (2 * resolution).max(12))
        }
    }
}

/// PSR displacement sampled at the background grid nodes. With structure
/// masks, per-partition affine displacements are blended with weights
/// proportional to each partition's tube indicator.
fn psr_displacement_field(
    source: &SortedPointCloud,
    target: &SortedPointCloud,
    grid: &Grid,
    config: &RegistrationConfig,
) -> Result<Points> {
    let dim = source.dim();
    let nodes = grid.nodes();
    let partitions: Vec<(Points, Points)> = match &config.masks {
        None => vec![(source.points.clone(), target.points.clone())],
        Some(masks) => {
            let mut parts = vec![(Points::zeros(0, dim), Points::zeros(0, dim)); masks.boxes.len() + 1];
            for (s, t) in source.points.iter().zip(target.points.iter()) {
                let k = masks
                    .boxes
                    .iter()
                    .position(|(lo, hi)| (0..dim).all(|c| s[c] >= lo[c] && s[c] <= hi[c]))
                    .unwrap_or(masks.boxes.len());
                parts[k].0.push(s);
                parts[k].1.push(t);
            }
            parts.retain(|(s, _)| !s.is_empty());
            parts
        }
    };
    let mut maps = Vec::with_capacity(partitions.len());
    for (s, t) in &partitions {
        let gx = gaussian_mle(&PointCloud::new(s.clone()))?;
        let gy = gaussian_mle(&PointCloud::new(t.clone()))?;
        maps.push(ot_gaussian_map(&gx, &gy)?);
    }
    let mut displacement = Points::zeros(0, dim);
    if maps.len() == 1 {
        for x in nodes.iter() {
            displacement.push(&maps[0].displacement(x));
        }
    } else {
        let weights: Vec<Vec<f64>> = partitions
            .iter()
            .map(|(s, _)| tube_indicator(s, config.eta, config.delta, nodes))
            .collect::<Result<_>>()?;
        for (i, x) in nodes.iter().enumerate() {
            let total: f64 = weights.iter().map(|w| w[i]).sum();
            let mut v = vec![0.0; dim];
            for (w, map) in weights.iter().zip(&maps) {
                let part = map.displacement(x);
                let scale = w[i] / total;
                for (vc, pc) in v.iter_mut().zip(&part) {
                    *vc += scale * pc;
                }
            }
            displacement.push(&v);
        }
    }
    Ok(displacement)
}
