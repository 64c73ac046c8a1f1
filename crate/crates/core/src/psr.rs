//! Gaussian-based point-set registration.
//!
//! Each raw cloud is summarized by its maximum-likelihood Gaussian; the
//! closed-form optimal-transport map between two Gaussians is an affine map
//! with a symmetric positive definite matrix, which is applied to the
//! template to produce a sorted cloud of fixed size and ordering.

use crate::error::{Error, Result};
use crate::field::{euclidean, PointCloud, Points, SortedPointCloud, TrainingDataset};
use crate::linalg::sym_power;
use nalgebra::{DMatrix, DVector};

/// Fitted Gaussian summary of a point cloud.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    pub mean: DVector<f64>,
    /// Biased (1/N) sample covariance, symmetric by construction.
    pub covariance: DMatrix<f64>,
}

impl GaussianModel {
    /// Eigenvalue floor used to regularize rank-deficient covariances
    /// (collinear clouds, single points) before inversion.
    pub fn regularization_floor(&self) -> f64 {
        let d = self.mean.len() as f64;
        let scale = self.covariance.trace() / d;
        if scale > 0.0 {
            1e-10 * scale
        } else {
            1e-10
        }
    }
}

/// Maximum-likelihood Gaussian fit: exact sample mean and biased covariance.
pub fn gaussian_mle(cloud: &PointCloud) -> Result<GaussianModel> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::invalid("cannot fit a Gaussian to an empty cloud"));
    }
    let d = cloud.dim();
    let mut mean = DVector::zeros(d);
    for p in cloud.points.iter() {
        for k in 0..d {
            mean[k] += p[k];
        }
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    for p in cloud.points.iter() {
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += (p[i] - mean[i]) * (p[j] - mean[j]);
            }
        }
    }
    cov /= n as f64;
    Ok(GaussianModel { mean, covariance: cov })
}

/// Affine map `x -> A x + b`. For optimal-transport maps `A` is symmetric
/// positive definite.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn identity(d: usize) -> Self {
        AffineMap { matrix: DMatrix::identity(d, d), offset: DVector::zeros(d) }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = self.matrix.ncols();
        let mut out = self.offset.clone();
        for j in 0..v {
            for i in 0..v {
                out[i] += self.matrix[(i, j)] * x[j];
            }
        }
        out.as_slice().to_vec()
    }

    pub fn apply_points(&self, pts: &Points) -> Points {
        let mut out = Points::zeros(0, pts.dim());
        for p in pts.iter() {
            out.push(&self.apply(p));
        }
        out
    }

    /// Displacement `A x + b - x` at `x`.
    pub fn displacement(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.apply(x);
        for (vi, xi) in v.iter_mut().zip(x) {
            *vi -= xi;
        }
        v
    }
}

/// Closed-form optimal-transport map between two Gaussians:
/// `T(x) = mu_Y + S^-1/2 (S^1/2 Sigma_Y S^1/2)^1/2 S^-1/2 (x - mu_X)` with
/// `S = Sigma_X`. Covariances are floor-regularized before inversion.
pub fn ot_gaussian_map(gx: &GaussianModel, gy: &GaussianModel) -> Result<AffineMap> {
    let d = gx.mean.len();
    if gy.mean.len() != d {
        return Err(Error::invalid("Gaussian dimensions differ"));
    }
    if gx.covariance.iter().any(|v| !v.is_finite()) || gy.covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("covariance has non-finite entries"));
    }
    let floor_x = gx.regularization_floor();
    let floor_y = gy.regularization_floor();
    let sx_half = sym_power(&gx.covariance, 0.5, floor_x)?;
    let sx_inv_half = sym_power(&gx.covariance, -0.5, floor_x)?;
    let sy = sym_power(&gy.covariance, 1.0, floor_y)?;
    let inner = &sx_half * sy * &sx_half;
    let inner_half = sym_power(&inner, 0.5, 0.0)?;
    let a = &sx_inv_half * inner_half * &sx_inv_half;
    // Symmetrize away the rounding skew before returning.
    let a = (&a + a.transpose()) * 0.5;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("optimal-transport matrix is not finite"));
    }
    let offset = &gy.mean - &a * &gx.mean;
    Ok(AffineMap { matrix: a, offset })
}

/// Match a raw cloud against the template: the output has exactly the
/// template's size, point `i` being the OT image of template point `i`.
pub fn match_clouds(template: &PointCloud, raw: &PointCloud, template_id: usize) -> Result<SortedPointCloud> {
    if template.is_empty() || raw.is_empty() {
        return Err(Error::invalid("point-set registration requires nonempty clouds"));
    }
    let gx = gaussian_mle(template)?;
    let gy = gaussian_mle(raw)?;
    let map = ot_gaussian_map(&gx, &gy)?;
    SortedPointCloud::new(map.apply_points(&template.points), template_id)
}

/// Axis-aligned boxes that split a multi-structure cloud into independently
/// matched partitions; points outside every box form a trailing partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainMasks {
    pub boxes: Vec<([f64; 2], [f64; 2])>,
}

impl SubdomainMasks {
    fn partition_of(&self, p: &[f64]) -> usize {
        for (k, (lo, hi)) in self.boxes.iter().enumerate() {
            let inside = (0..p.len()).all(|c| p[c] >= lo[c] && p[c] <= hi[c]);
            if inside {
                return k;
            }
        }
        self.boxes.len()
    }

    fn split(&self, cloud: &PointCloud) -> Vec<Points> {
        let mut parts = vec![Points::zeros(0, cloud.dim()); self.boxes.len() + 1];
        for p in cloud.points.iter() {
            parts[self.partition_of(p)].push(p);
        }
        parts
    }
}

/// Match a cloud partition-by-partition; the sorted cloud concatenates the
/// partitions in mask order.
pub fn match_clouds_partitioned(
    template: &PointCloud,
    raw: &PointCloud,
    masks: Option<&SubdomainMasks>,
    template_id: usize,
) -> Result<SortedPointCloud> {
    let Some(masks) = masks else {
        return match_clouds(template, raw, template_id);
    };
    let t_parts = masks.split(template);
    let r_parts = masks.split(raw);
    let mut out = Points::zeros(0, template.dim());
    for (k, (tp, rp)) in t_parts.iter().zip(&r_parts).enumerate() {
        match (tp.is_empty(), rp.is_empty()) {
            (true, true) => continue,
            (false, false) => {}
            _ => {
                return Err(Error::invalid(format!(
                    "structure partition {k} is empty on one side of the match"
                )));
            }
        }
        let sorted = match_clouds(&PointCloud::new(tp.clone()), &PointCloud::new(rp.clone()), template_id)?;
        for p in sorted.points.iter() {
            out.push(p);
        }
    }
    SortedPointCloud::new(out, template_id)
}

/// Pick the template: the raw cloud of the training parameter closest to the
/// centroid of the parameter set, ties broken by lowest index.
pub fn select_template(dataset: &TrainingDataset, raw_clouds: &[PointCloud]) -> Result<usize> {
    if dataset.is_empty() || raw_clouds.len() != dataset.len() {
        return Err(Error::invalid("template selection needs one raw cloud per training parameter"));
    }
    let centroid = dataset.parameters().centroid();
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for k in 0..dataset.len() {
        let d = euclidean(dataset.parameters().get(k), &centroid);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    Ok(best)
}

/// Directed Hausdorff distance `max_y min_x |y - T(x)|`, exposed as a
/// registration diagnostic.
pub fn directed_hausdorff(target: &PointCloud, deformed: &Points) -> f64 {
    let mut worst = 0.0f64;
    for y in target.points.iter() {
        let mut best = f64::INFINITY;
        for x in deformed.iter() {
            best = best.min(euclidean(y, x));
        }
        worst = worst.max(best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cloud_from(rows: &[[f64; 2]]) -> PointCloud {
        let mut pts = Points::zeros(0, 2);
        for r in rows {
            pts.push(r);
        }
        PointCloud::new(pts)
    }

    #[test]
    fn mle_of_symmetric_square() {
        let cloud = cloud_from(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]);
        let g = gaussian_mle(&cloud).unwrap();
        assert_relative_eq!(g.mean[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.mean[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.covariance[(0, 0)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.covariance[(1, 1)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.covariance[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mle_of_single_point_is_floored() {
        let cloud = cloud_from(&[[3.0, -1.0]]);
        let g = gaussian_mle(&cloud).unwrap();
        assert_eq!(g.mean[0], 3.0);
        assert_eq!(g.covariance[(0, 0)], 0.0);
        assert!(g.regularization_floor() > 0.0);
    }

    #[test]
    fn mle_concentrates_on_gaussian_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Points::zeros(0, 2);
        for _ in 0..1000 {
            // Box-Muller samples of N((3,-1), diag(4,1)).
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            let r = (-2.0 * u1.ln()).sqrt();
            let z0 = r * (2.0 * std::f64::consts::PI * u2).cos();
            let z1 = r * (2.0 * std::f64::consts::PI * u2).sin();
            pts.push(&[3.0 + 2.0 * z0, -1.0 + z1]);
        }
        let g = gaussian_mle(&PointCloud::new(pts)).unwrap();
        assert!((g.mean[0] - 3.0).abs() < 0.2);
        assert!((g.mean[1] + 1.0).abs() < 0.2);
        assert!((g.covariance[(0, 0)] - 4.0).abs() < 0.3);
        assert!((g.covariance[(1, 1)] - 1.0).abs() < 0.3);
        assert!(g.covariance[(0, 1)].abs() < 0.3);
    }

    #[test]
    fn ot_map_between_equal_gaussians_is_identity() {
        let cloud = cloud_from(&[[0.0, 1.0], [1.0, 0.0], [-1.0, 0.5]]);
        let g = gaussian_mle(&cloud).unwrap();
        let map = ot_gaussian_map(&g, &g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(map.matrix[(i, j)], expect, epsilon = 1e-10);
            }
            assert_relative_eq!(map.offset[i], 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ot_map_scalar_dilation() {
        let gx = GaussianModel { mean: DVector::zeros(2), covariance: DMatrix::identity(2, 2) };
        let gy = GaussianModel {
            mean: DVector::from_column_slice(&[1.0, 0.0]),
            covariance: DMatrix::identity(2, 2) * 4.0,
        };
        let map = ot_gaussian_map(&gx, &gy).unwrap();
        let y = map.apply(&[0.5, -0.25]);
        assert_relative_eq!(y[0], 1.0 + 2.0 * 0.5, epsilon = 1e-10);
        assert_relative_eq!(y[1], -0.5, epsilon = 1e-10);
    }

    /// Independent square-root oracle: Denman-Beavers iteration.
    fn db_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = m.clone();
        let mut z = DMatrix::<f64>::identity(m.nrows(), m.ncols());
        for _ in 0..60 {
            let y_inv = y.clone().try_inverse().unwrap();
            let z_inv = z.clone().try_inverse().unwrap();
            let y_next = (&y + z_inv) * 0.5;
            let z_next = (&z + y_inv) * 0.5;
            y = y_next;
            z = z_next;
        }
        y
    }

    fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        let a = DMatrix::<f64>::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(d, d) * rng.random_range(0.05..0.5)
    }

    #[test]
    fn ot_map_pushforward_and_symmetry_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [1usize, 2] {
            for _ in 0..50 {
                let gx = GaussianModel {
                    mean: DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0)),
                    covariance: random_spd(&mut rng, d),
                };
                let gy = GaussianModel {
                    mean: DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0)),
                    covariance: random_spd(&mut rng, d),
                };
                let map = ot_gaussian_map(&gx, &gy).unwrap();
                let a = &map.matrix;
                assert!((a - a.transpose()).norm() < 1e-10 * a.norm());
                let eig = a.clone().symmetric_eigen();
                assert!(eig.eigenvalues.iter().all(|&l| l > 0.0));
                let push = a * &gx.covariance * a.transpose();
                assert!(
                    (&push - &gy.covariance).norm() <= 1e-10 * gy.covariance.norm(),
                    "pushforward violated: {:e}",
                    (&push - &gy.covariance).norm() / gy.covariance.norm()
                );
                // Cross-check the inner square root against Denman-Beavers.
                let sx_half = sym_power(&gx.covariance, 0.5, 0.0).unwrap();
                let inner = &sx_half * &gy.covariance * &sx_half;
                let inner_half = sym_power(&inner, 0.5, 0.0).unwrap();
                assert!((&inner_half - db_sqrt(&inner)).norm() < 1e-8 * inner_half.norm().max(1.0));
            }
        }
    }

    #[test]
    fn ot_map_inverse_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let gx = GaussianModel {
                mean: DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)),
                covariance: random_spd(&mut rng, 2),
            };
            let gy = GaussianModel {
                mean: DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)),
                covariance: random_spd(&mut rng, 2),
            };
            let fwd = ot_gaussian_map(&gx, &gy).unwrap();
            let bwd = ot_gaussian_map(&gy, &gx).unwrap();
            let x = [0.37, -0.9];
            let back = bwd.apply(&fwd.apply(&x));
            assert!((back[0] - x[0]).abs() < 1e-8);
            assert!((back[1] - x[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn match_identity_and_translation() {
        let template = cloud_from(&[[0.0, 0.0], [1.0, 0.2], [0.5, 0.8], [0.2, 0.4]]);
        let same = match_clouds(&template, &template, 0).unwrap();
        for (a, b) in same.points.iter().zip(template.points.iter()) {
            assert_relative_eq!(a[0], b[0], epsilon = 1e-12);
            assert_relative_eq!(a[1], b[1], epsilon = 1e-12);
        }
        let shift = [0.3, -0.1];
        let mut moved = Points::zeros(0, 2);
        for p in template.points.iter() {
            moved.push(&[p[0] + shift[0], p[1] + shift[1]]);
        }
        let matched = match_clouds(&template, &PointCloud::new(moved), 0).unwrap();
        for (a, b) in matched.points.iter().zip(template.points.iter()) {
            assert_relative_eq!(a[0], b[0] + shift[0], epsilon = 1e-10);
            assert_relative_eq!(a[1], b[1] + shift[1], epsilon = 1e-10);
        }
    }

    #[test]
    fn circle_template_maps_onto_ellipse_locus() {
        let n = 64;
        let mut tpl = Points::zeros(0, 2);
        let mut raw = Points::zeros(0, 2);
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            tpl.push(&[th.cos(), th.sin()]);
            // Unrelated ordering on the target ellipse with axes (2, 1).
            let phi = 2.0 * std::f64::consts::PI * ((k * 17) % n) as f64 / n as f64;
            raw.push(&[2.0 * phi.cos(), phi.sin()]);
        }
        let sorted = match_clouds(&PointCloud::new(tpl), &PointCloud::new(raw), 0).unwrap();
        for p in sorted.points.iter() {
            let locus = (p[0] / 2.0).powi(2) + p[1].powi(2);
            assert_relative_eq!(locus, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn pushforward_moves_sample_moments_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut src = Points::zeros(0, 2);
        for _ in 0..120 {
            src.push(&[rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)]);
        }
        let mut dst = Points::zeros(0, 2);
        for _ in 0..80 {
            dst.push(&[rng.random_range(1.0..2.0), rng.random_range(-2.0..0.0)]);
        }
        let src = PointCloud::new(src);
        let dst = PointCloud::new(dst);
        let gx = gaussian_mle(&src).unwrap();
        let gy = gaussian_mle(&dst).unwrap();
        let map = ot_gaussian_map(&gx, &gy).unwrap();
        let moved = PointCloud::new(map.apply_points(&src.points));
        let gm = gaussian_mle(&moved).unwrap();
        assert!((gm.mean - &gy.mean).norm() < 1e-10 * gy.mean.norm().max(1.0));
        assert!((gm.covariance - &gy.covariance).norm() < 1e-10 * gy.covariance.norm());
    }

    #[test]
    fn template_selection_prefers_centroid() {
        let grid = crate::mesh::Grid::interval_uniform(0.0, 1.0, 3).unwrap();
        let snaps: Vec<crate::field::Snapshot> = [-1.0f64, 0.0, 1.0]
            .iter()
            .map(|&mu| crate::field::Snapshot::scalar(vec![mu], vec![mu; 3]).unwrap())
            .collect();
        let ds = TrainingDataset::new(grid, snaps).unwrap();
        let clouds = vec![
            cloud_from(&[[0.0, 0.0]]),
            cloud_from(&[[0.5, 0.5]]),
            cloud_from(&[[1.0, 1.0]]),
        ];
        let clouds_1d: Vec<PointCloud> = clouds
            .iter()
            .map(|c| {
                let mut p = Points::zeros(0, 1);
                for r in c.points.iter() {
                    p.push(&[r[0]]);
                }
                PointCloud::new(p)
            })
            .collect();
        assert_eq!(select_template(&ds, &clouds_1d).unwrap(), 1);
    }

    #[test]
    fn template_selection_on_tensor_grid_picks_center() {
        let grid = crate::mesh::Grid::interval_uniform(0.0, 1.0, 3).unwrap();
        let mut snaps = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                let mu = vec![i as f64, 10.0 + j as f64];
                snaps.push(crate::field::Snapshot::new(mu, vec![0.0, 1.0, 2.0], 1, vec!["u".into()]).unwrap());
            }
        }
        let ds = TrainingDataset::new(grid, snaps).unwrap();
        let clouds: Vec<PointCloud> = (0..9).map(|_| cloud_from(&[[0.0, 0.0]])).collect();
        // Center of the 3x3 grid is index 4.
        assert_eq!(select_template(&ds, &clouds).unwrap(), 4);
    }

    #[test]
    fn partitioned_match_concatenates_in_mask_order() {
        let template = cloud_from(&[[0.1, 0.1], [0.2, 0.1], [0.8, 0.9], [0.9, 0.9]]);
        let mut moved = Points::zeros(0, 2);
        for p in template.points.iter() {
            if p[1] < 0.5 {
                moved.push(&[p[0] + 0.05, p[1]]);
            } else {
                moved.push(&[p[0] - 0.05, p[1]]);
            }
        }
        let masks = SubdomainMasks {
            boxes: vec![([0.0, 0.0], [1.0, 0.5]), ([0.0, 0.5], [1.0, 1.0])],
        };
        let sorted =
            match_clouds_partitioned(&template, &PointCloud::new(moved), Some(&masks), 0).unwrap();
        assert_eq!(sorted.len(), 4);
        assert_relative_eq!(sorted.points.get(0)[0], 0.15, epsilon = 1e-9);
        assert_relative_eq!(sorted.points.get(2)[0], 0.75, epsilon = 1e-9);
    }

    #[test]
    fn hausdorff_diagnostic_is_zero_for_equal_sets() {
        let c = cloud_from(&[[0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(directed_hausdorff(&c, &c.points), 0.0);
    }
}
