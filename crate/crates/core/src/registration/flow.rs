//! Velocity fields on background grids and their unit-time flow maps.

use super::DeformationMap;
use crate::error::{Error, Result};
use crate::field::{interpolate_values, Points};
use crate::mesh::Grid;

/// A velocity field stored at background grid nodes, with the tangency
/// condition `v . n = 0` holding at every boundary node by construction.
#[derive(Debug, Clone)]
pub struct VelocityField {
    grid: Grid,
    values: Points,
}

impl VelocityField {
    pub fn new(grid: Grid, values: Points) -> Result<Self> {
        if values.len() != grid.n_nodes() || values.dim() != grid.dim() {
            return Err(Error::invalid("velocity values do not match the grid"));
        }
        if !values.all_finite() {
            return Err(Error::invalid("velocity values must be finite"));
        }
        Ok(VelocityField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &Points {
        &self.values
    }

    /// Interpolated velocity at `x` (must lie in the closure of the domain).
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut q = Points::zeros(0, self.grid.dim());
        q.push(x);
        interpolate_values(&self.grid, self.values.as_slice(), self.grid.dim(), &q)
    }

    /// Largest `|v . n|` over boundary nodes.
    pub fn max_boundary_normal_component(&self) -> f64 {
        let mut worst = 0.0f64;
        for bn in self.grid.boundary() {
            let v = self.values.get(bn.node);
            let dot: f64 = v.iter().zip(&bn.normal).map(|(a, b)| a * b).sum();
            worst = worst.max(dot.abs());
        }
        worst
    }

    /// Zero the normal component at every boundary node.
    pub fn enforce_boundary_tangency(&mut self) {
        let dim = self.grid.dim();
        let boundary: Vec<_> = self.grid.boundary().to_vec();
        for bn in boundary {
            let v = self.values.get_mut(bn.node);
            let dot: f64 = v.iter().zip(&bn.normal).map(|(a, b)| a * b).sum();
            for k in 0..dim {
                v[k] -= dot * bn.normal[k];
            }
        }
    }
}

/// Unit-time flow map of a velocity field, integrated with the explicit
/// Euler scheme; iterates that overshoot the domain are projected back.
pub fn flow_map(velocity: VelocityField, dt: f64) -> Result<DeformationMap> {
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(Error::invalid("flow time step must lie in (0, 1]"));
    }
    let n_steps = (1.0 / dt).round() as usize;
    Ok(DeformationMap::Flow { velocity, dt, n_steps })
}
