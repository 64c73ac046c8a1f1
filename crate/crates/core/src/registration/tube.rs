//! Regularized indicator of the tube region around a point cloud.

use crate::error::{Error, Result};
use crate::field::{euclidean, Points};

/// Smoothed indicator of the union of balls of radius `eta` around the cloud
/// points: `H(x) = (tanh(phi(x) / delta) + 1) / 2` with the signed distance
/// `phi(x) = eta - min_i |x - x_i|` (positive inside the tube). `H` tends to
/// one deep inside, to zero far outside, and equals one half on the tube
/// boundary.
pub fn tube_indicator(cloud: &Points, eta: f64, delta: f64, query_points: &Points) -> Result<Vec<f64>> {
    if cloud.is_empty() {
        return Err(Error::invalid("tube indicator of an empty cloud"));
    }
    if !(eta > 0.0 && delta > 0.0) {
        return Err(Error::invalid("tube indicator needs eta > 0 and delta > 0"));
    }
    let mut out = Vec::with_capacity(query_points.len());
    for q in query_points.iter() {
        let mut min_dist = f64::INFINITY;
        for p in cloud.iter() {
            min_dist = min_dist.min(euclidean(q, p));
        }
        let phi = eta - min_dist;
        out.push(0.5 * ((phi / delta).tanh() + 1.0));
    }
    Ok(out)
}
