//! Exact piecewise-linear bijections of an interval.

use crate::error::{Error, Result};
use crate::field::SortedPointCloud;
use crate::mesh::Domain;

/// Piecewise-linear map fixing the interval endpoints and sending each
/// source knot to its target knot. Bijective as long as both knot sequences
/// are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearMap {
    knots_src: Vec<f64>,
    knots_dst: Vec<f64>,
}

impl PiecewiseLinearMap {
    /// Build from interior knot pairs on `(a, b)`; endpoints are pinned.
    pub fn new(domain: &Domain, interior_src: &[f64], interior_dst: &[f64]) -> Result<Self> {
        let (a, b) = match domain {
            Domain::Interval { a, b } => (*a, *b),
            _ => return Err(Error::invalid("piecewise-linear maps require an interval domain")),
        };
        if interior_src.len() != interior_dst.len() {
            return Err(Error::invalid("source and target knot counts differ"));
        }
        let mut pairs: Vec<(f64, f64)> =
            interior_src.iter().copied().zip(interior_dst.iter().copied()).collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("knots must not be NaN"));
        let mut knots_src = vec![a];
        let mut knots_dst = vec![a];
        for (s, d) in pairs {
            if !(s > a && s < b) || !(d > a && d < b) {
                return Err(Error::invalid(format!(
                    "knot pair ({s}, {d}) must lie strictly inside ({a}, {b})"
                )));
            }
            knots_src.push(s);
            knots_dst.push(d);
        }
        knots_src.push(b);
        knots_dst.push(b);
        for w in knots_src.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("source knots must be strictly increasing"));
            }
        }
        for w in knots_dst.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::numerical(
                    "target knots are not monotone: the piecewise-linear map would fold",
                ));
            }
        }
        Ok(PiecewiseLinearMap { knots_src, knots_dst })
    }

    pub fn apply(&self, x: f64) -> f64 {
        let n = self.knots_src.len();
        if x <= self.knots_src[0] {
            return self.knots_dst[0];
        }
        if x >= self.knots_src[n - 1] {
            return self.knots_dst[n - 1];
        }
        let mut i = match self.knots_src.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.knots_dst[i],
            Err(i) => i - 1,
        };
        if i + 1 >= n {
            i = n - 2;
        }
        let (s0, s1) = (self.knots_src[i], self.knots_src[i + 1]);
        let (d0, d1) = (self.knots_dst[i], self.knots_dst[i + 1]);
        d0 + (x - s0) * (d1 - d0) / (s1 - s0)
    }
}

/// Build the map sending the source cloud to the target cloud on an interval.
pub fn from_clouds(
    source: &SortedPointCloud,
    target: &SortedPointCloud,
    domain: &Domain,
) -> Result<PiecewiseLinearMap> {
    if source.dim() != 1 || target.dim() != 1 {
        return Err(Error::invalid("interval registration needs one-dimensional clouds"));
    }
    let src: Vec<f64> = source.points.iter().map(|p| p[0]).collect();
    let dst: Vec<f64> = target.points.iter().map(|p| p[0]).collect();
    PiecewiseLinearMap::new(domain, &src, &dst)
}
