//! Low-rank regression of sorted point clouds over parameter space.
//!
//! Clouds are first compressed by POD; each retained coefficient is then
//! regressed with Gaussian-kernel ridge regression, with leave-one-out
//! cross-validation selecting the ridge strength and kernel width and an
//! out-of-sample R-squared filter discarding unpredictable modes. A
//! barycentric linear mode covers datasets too small for cross-validation.

use crate::error::{Error, Result};
use crate::field::{euclidean, Points, SortedPointCloud};
use crate::linalg::spd_solve;
use nalgebra::{DMatrix, DVector};

/// POD expansion of a set of sorted clouds: `X_k = sum_i Z_i beta_k^i`.
#[derive(Debug, Clone)]
pub struct CloudPodBasis {
    pub n_points: usize,
    pub dim: usize,
    /// Orthonormal modes as columns, `(N*d) x M`.
    pub modes: DMatrix<f64>,
    /// Expansion coefficients, `n_train x M`.
    pub coefficients: DMatrix<f64>,
    /// Non-increasing singular values, length `M`.
    pub singular_values: DVector<f64>,
}

impl CloudPodBasis {
    pub fn n_modes(&self) -> usize {
        self.modes.ncols()
    }

    /// Assemble a cloud from a coefficient vector.
    pub fn synthesize(&self, coeffs: &DVector<f64>, template_id: usize) -> Result<SortedPointCloud> {
        let flat = &self.modes * coeffs;
        let points = Points::from_flat(self.dim, flat.as_slice().to_vec())?;
        SortedPointCloud::new(points, template_id)
    }
}

/// POD of sorted clouds via the SVD of the stacked cloud matrix. All
/// `M = min(N*d, n_train)` modes are retained, so training clouds are
/// reconstructed exactly.
pub fn pod_clouds(sorted_clouds: &[SortedPointCloud]) -> Result<CloudPodBasis> {
    let first = sorted_clouds
        .first()
        .ok_or_else(|| Error::invalid("POD needs at least one sorted cloud"))?;
    let (n_points, dim) = (first.len(), first.dim());
    let n_train = sorted_clouds.len();
    let nd = n_points * dim;
    let mut stacked = DMatrix::<f64>::zeros(nd, n_train);
    for (k, cloud) in sorted_clouds.iter().enumerate() {
        if cloud.len() != n_points || cloud.dim() != dim {
            return Err(Error::invalid(format!("cloud {k} has inconsistent size")));
        }
        for (r, v) in cloud.points.as_slice().iter().enumerate() {
            stacked[(r, k)] = *v;
        }
    }
    let svd = stacked.svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let m = svd.singular_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let mut modes = DMatrix::<f64>::zeros(nd, m);
    let mut coefficients = DMatrix::<f64>::zeros(n_train, m);
    let mut singular_values = DVector::<f64>::zeros(m);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = svd.singular_values[src];
        singular_values[dst] = sigma;
        for r in 0..nd {
            modes[(r, dst)] = u[(r, src)];
        }
        for k in 0..n_train {
            coefficients[(k, dst)] = sigma * v_t[(src, k)];
        }
    }
    Ok(CloudPodBasis { n_points, dim, modes, coefficients, singular_values })
}

/// Gaussian kernel `exp(-|a - b|^2 / (2 width^2))`.
pub fn gaussian_kernel(a: &[f64], b: &[f64], width: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * width * width)).exp()
}

fn kernel_matrix(params: &Points, width: f64) -> DMatrix<f64> {
    let n = params.len();
    DMatrix::from_fn(n, n, |i, j| gaussian_kernel(params.get(i), params.get(j), width))
}

/// Kernel ridge fit: solve `(K + lambda I) w = y`. With `lambda = 0` and
/// pairwise-distinct nodes the fit interpolates the data.
pub fn rbf_fit(parameters: &Points, values: &[f64], lambda: f64, width: f64) -> Result<DVector<f64>> {
    let n = parameters.len();
    if values.len() != n {
        return Err(Error::invalid("one value per parameter required"));
    }
    if lambda < 0.0 || width <= 0.0 {
        return Err(Error::invalid("ridge needs lambda >= 0 and width > 0"));
    }
    let mut k = kernel_matrix(parameters, width);
    for i in 0..n {
        k[(i, i)] += lambda;
    }
    spd_solve(k, DVector::from_column_slice(values)).map_err(|_| {
        Error::numerical("singular kernel system: duplicated parameters with lambda = 0")
    })
}

/// Evaluate a kernel ridge fit at `mu`.
pub fn rbf_eval(centers: &Points, weights: &DVector<f64>, width: f64, mu: &[f64]) -> f64 {
    centers
        .iter()
        .zip(weights.iter())
        .map(|(c, w)| w * gaussian_kernel(mu, c, width))
        .sum()
}

/// Grids and thresholds for cross-validated kernel ridge regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfConfig {
    pub lambda_grid: Vec<f64>,
    /// Multiples of the mean pairwise parameter distance tried as widths.
    pub width_scales: Vec<f64>,
    pub r2_threshold: f64,
}

impl Default for RbfConfig {
    fn default() -> Self {
        RbfConfig {
            lambda_grid: (0..8).map(|k| 10f64.powi(-8 + k)).collect(),
            width_scales: vec![0.25, 0.5, 1.0, 2.0],
            r2_threshold: 0.5,
        }
    }
}

/// Mean pairwise Euclidean distance of a parameter set.
pub fn mean_pairwise_distance(params: &Points) -> f64 {
    let n = params.len();
    if n < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += euclidean(params.get(i), params.get(j));
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Outcome of leave-one-out cross-validation.
#[derive(Debug, Clone)]
pub struct CvSelection {
    pub lambda: f64,
    pub width: f64,
    /// Out-of-sample R-squared per mode; `-inf` marks zero-variance modes.
    pub r2_oos: Vec<f64>,
}

/// Leave-one-out cross-validation over a `(lambda, width)` grid, minimizing
/// the mean LOO squared error over all non-constant modes. Ties prefer the
/// larger `lambda`, then the larger `width`.
pub fn cross_validate(
    parameters: &Points,
    coefficient_samples: &DMatrix<f64>,
    lambda_grid: &[f64],
    width_grid: &[f64],
) -> Result<CvSelection> {
    let n = parameters.len();
    if n < 3 {
        return Err(Error::invalid("leave-one-out cross-validation needs at least 3 samples"));
    }
    if lambda_grid.is_empty() || width_grid.is_empty() {
        return Err(Error::invalid("cross-validation grids must be nonempty"));
    }
    let n_modes = coefficient_samples.ncols();
    let variances: Vec<f64> = (0..n_modes)
        .map(|i| {
            let col = coefficient_samples.column(i);
            let mean = col.sum() / n as f64;
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        })
        .collect();
    let active: Vec<usize> = (0..n_modes).filter(|&i| variances[i] > 0.0).collect();

    let loo_errors = |lambda: f64, width: f64| -> Result<DMatrix<f64>> {
        let mut residuals = DMatrix::<f64>::zeros(n, active.len());
        for k in 0..n {
            let mut train = Points::zeros(0, parameters.dim());
            for j in 0..n {
                if j != k {
                    train.push(parameters.get(j));
                }
            }
            let mut km = kernel_matrix(&train, width);
            for i in 0..n - 1 {
                km[(i, i)] += lambda;
            }
            let chol = km
                .cholesky()
                .ok_or_else(|| Error::numerical("LOO kernel system is singular"))?;
            for (col, &mode) in active.iter().enumerate() {
                let mut y = DVector::<f64>::zeros(n - 1);
                let mut r = 0;
                for j in 0..n {
                    if j != k {
                        y[r] = coefficient_samples[(j, mode)];
                        r += 1;
                    }
                }
                let w = chol.solve(&y);
                let pred = rbf_eval(&train, &w, width, parameters.get(k));
                residuals[(k, col)] = pred - coefficient_samples[(k, mode)];
            }
        }
        Ok(residuals)
    };

    let mut best: Option<(f64, f64, f64, DMatrix<f64>)> = None;
    for &lambda in lambda_grid {
        for &width in width_grid {
            let res = loo_errors(lambda, width)?;
            let mse = if active.is_empty() {
                0.0
            } else {
                res.iter().map(|e| e * e).sum::<f64>() / (n * active.len()) as f64
            };
            let better = match &best {
                None => true,
                Some((b_mse, b_l, b_w, _)) => {
                    if mse < b_mse * (1.0 - 1e-12) {
                        true
                    } else if mse <= b_mse * (1.0 + 1e-12) {
                        // Tie: stronger regularization wins.
                        lambda > *b_l || (lambda == *b_l && width > *b_w)
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((mse, lambda, width, res));
            }
        }
    }
    let (_, lambda, width, residuals) = best.expect("nonempty grid yields a selection");
    let mut r2_oos = vec![f64::NEG_INFINITY; n_modes];
    for (col, &mode) in active.iter().enumerate() {
        let sse: f64 = residuals.column(col).iter().map(|e| e * e).sum();
        r2_oos[mode] = 1.0 - sse / variances[mode];
    }
    Ok(CvSelection { lambda, width, r2_oos })
}

/// Per-mode outcome of the R-squared filter.
#[derive(Debug, Clone)]
enum ModeFate {
    /// Kernel ridge weights for a predictable mode.
    Regressed(DVector<f64>),
    /// Zero-variance mode carried as its constant value.
    Constant(f64),
    /// Unpredictable mode excluded from the estimator.
    Dropped,
}

/// Regression backend choice; `Auto` uses barycentric linear interpolation
/// when `n_train <= P + 1` and RBF-on-POD otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegressionMode {
    #[default]
    Auto,
    Rbf,
    Linear,
}

#[derive(Debug, Clone, Default)]
pub struct RegressionConfig {
    pub mode: RegressionMode,
    pub rbf: RbfConfig,
}

#[derive(Debug, Clone)]
enum Engine {
    Constant,
    Linear,
    RbfPod { pod: CloudPodBasis, width: f64, fates: Vec<ModeFate> },
}

/// Trained cloud predictor: POD + filtered RBF (or barycentric linear)
/// regression, with an exact snap at training parameters and an
/// extrapolation guard at twice the training bounding box.
#[derive(Debug, Clone)]
pub struct CloudPredictor {
    parameters: Points,
    clouds: Vec<SortedPointCloud>,
    engine: Engine,
    snap_tol: f64,
    guard_center: Vec<f64>,
    guard_halfwidth: Vec<f64>,
    pub selection: Option<CvSelection>,
}

/// Fit the cloud predictor on matched training clouds.
pub fn fit_predictor(
    parameters: &Points,
    clouds: &[SortedPointCloud],
    config: &RegressionConfig,
) -> Result<CloudPredictor> {
    let n = parameters.len();
    if n == 0 || clouds.len() != n {
        return Err(Error::invalid("one sorted cloud per training parameter required"));
    }
    let p = parameters.dim();
    let mut diam = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            diam = diam.max(euclidean(parameters.get(i), parameters.get(j)));
        }
    }
    let mut guard_center = vec![0.0; p];
    let mut guard_halfwidth = vec![0.0; p];
    for d in 0..p {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n {
            lo = lo.min(parameters.get(k)[d]);
            hi = hi.max(parameters.get(k)[d]);
        }
        guard_center[d] = 0.5 * (lo + hi);
        guard_halfwidth[d] = 0.5 * (hi - lo);
    }
    let use_linear = match config.mode {
        RegressionMode::Linear => true,
        RegressionMode::Auto => n <= p + 1,
        RegressionMode::Rbf => false,
    };
    let mut selection = None;
    let engine = if n == 1 {
        Engine::Constant
    } else if use_linear {
        Engine::Linear
    } else {
        let pod = pod_clouds(clouds)?;
        let mean_dist = mean_pairwise_distance(parameters);
        let width_grid: Vec<f64> = config.rbf.width_scales.iter().map(|s| s * mean_dist).collect();
        let cv = cross_validate(parameters, &pod.coefficients, &config.rbf.lambda_grid, &width_grid)?;
        let mut fates = Vec::with_capacity(pod.n_modes());
        for i in 0..pod.n_modes() {
            let col = pod.coefficients.column(i);
            if cv.r2_oos[i] == f64::NEG_INFINITY {
                fates.push(ModeFate::Constant(col[0]));
            } else if cv.r2_oos[i] > config.rbf.r2_threshold {
                let values: Vec<f64> = col.iter().copied().collect();
                let w = rbf_fit(parameters, &values, cv.lambda, cv.width)?;
                fates.push(ModeFate::Regressed(w));
            } else {
                fates.push(ModeFate::Dropped);
            }
        }
        let engine = Engine::RbfPod { pod, width: cv.width, fates };
        selection = Some(cv);
        engine
    };
    Ok(CloudPredictor {
        parameters: parameters.clone(),
        clouds: clouds.to_vec(),
        engine,
        snap_tol: 1e-12 * diam,
        guard_center,
        guard_halfwidth,
        selection,
    })
}

impl CloudPredictor {
    pub fn parameters(&self) -> &Points {
        &self.parameters
    }

    pub fn training_cloud(&self, k: usize) -> &SortedPointCloud {
        &self.clouds[k]
    }

    /// Index of the training parameter `mu` snaps to, if any.
    pub fn snap_index(&self, mu: &[f64]) -> Option<usize> {
        (0..self.parameters.len()).find(|&k| euclidean(mu, self.parameters.get(k)) <= self.snap_tol)
    }

    fn check_guard(&self, mu: &[f64]) -> Result<()> {
        let tol = 1e-12 * (1.0 + self.guard_halfwidth.iter().sum::<f64>());
        for d in 0..mu.len() {
            if (mu[d] - self.guard_center[d]).abs() > 2.0 * self.guard_halfwidth[d] + tol {
                return Err(Error::invalid(format!(
                    "query parameter {mu:?} lies outside twice the training bounding box"
                )));
            }
        }
        Ok(())
    }

    /// Predict the sorted cloud at `mu`. Training parameters reproduce their
    /// stored cloud exactly.
    pub fn predict(&self, mu: &[f64]) -> Result<SortedPointCloud> {
        if mu.len() != self.parameters.dim() {
            return Err(Error::invalid("query parameter dimension mismatch"));
        }
        self.check_guard(mu)?;
        if let Some(k) = self.snap_index(mu) {
            return Ok(self.clouds[k].clone());
        }
        match &self.engine {
            Engine::Constant => Ok(self.clouds[0].clone()),
            Engine::Linear => {
                let w = barycentric_weights(&self.parameters, mu)?;
                let template_id = self.clouds[0].template_id;
                let dim = self.clouds[0].dim();
                let mut flat = vec![0.0; self.clouds[0].len() * dim];
                for (k, cloud) in self.clouds.iter().enumerate() {
                    for (dst, src) in flat.iter_mut().zip(cloud.points.as_slice()) {
                        *dst += w[k] * src;
                    }
                }
                SortedPointCloud::new(Points::from_flat(dim, flat)?, template_id)
            }
            Engine::RbfPod { pod, width, fates } => {
                let mut coeffs = DVector::<f64>::zeros(pod.n_modes());
                for (i, fate) in fates.iter().enumerate() {
                    coeffs[i] = match fate {
                        ModeFate::Regressed(w) => rbf_eval(&self.parameters, w, *width, mu),
                        ModeFate::Constant(c) => *c,
                        ModeFate::Dropped => 0.0,
                    };
                }
                pod.synthesize(&coeffs, self.clouds[0].template_id)
            }
        }
    }
}

/// Minimal-norm affine-combination weights: `sum w_k mu^k = mu`,
/// `sum w_k = 1`. Equivariant under parameter rototranslations.
pub fn barycentric_weights(parameters: &Points, mu: &[f64]) -> Result<Vec<f64>> {
    let n = parameters.len();
    let p = parameters.dim();
    let mut a = DMatrix::<f64>::zeros(p + 1, n);
    for k in 0..n {
        for d in 0..p {
            a[(d, k)] = parameters.get(k)[d];
        }
        a[(p, k)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(p + 1);
    rhs.as_mut_slice()[..p].copy_from_slice(mu);
    rhs[p] = 1.0;
    let svd = a.svd(true, true);
    let w = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::numerical(format!("barycentric weight solve failed: {e}")))?;
    Ok(w.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cloud_1d(xs: &[f64]) -> SortedPointCloud {
        let mut p = Points::zeros(0, 1);
        for &x in xs {
            p.push(&[x]);
        }
        SortedPointCloud::new(p, 0).unwrap()
    }

    fn params_1d(mus: &[f64]) -> Points {
        let mut p = Points::zeros(0, 1);
        for &m in mus {
            p.push(&[m]);
        }
        p
    }

    #[test]
    fn pod_single_cloud_is_normalized() {
        let c = cloud_1d(&[3.0, 4.0]);
        let pod = pod_clouds(&[c]).unwrap();
        assert_eq!(pod.n_modes(), 1);
        assert_relative_eq!(pod.singular_values[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(pod.modes.column(0).norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(pod.coefficients[(0, 0)].abs(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn pod_duplicate_clouds_have_rank_one() {
        let c = cloud_1d(&[1.0, 2.0, 3.0]);
        let pod = pod_clouds(&[c.clone(), c]).unwrap();
        assert_relative_eq!(pod.singular_values[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pod_reconstructs_and_matches_gram_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let clouds: Vec<SortedPointCloud> = (0..5)
            .map(|_| {
                let mut p = Points::zeros(0, 2);
                for _ in 0..7 {
                    p.push(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
                }
                SortedPointCloud::new(p, 0).unwrap()
            })
            .collect();
        let pod = pod_clouds(&clouds).unwrap();
        // Exact reconstruction with all modes.
        for (k, cloud) in clouds.iter().enumerate() {
            let coeffs = DVector::from_iterator(pod.n_modes(), pod.coefficients.row(k).iter().copied());
            let rebuilt = pod.synthesize(&coeffs, 0).unwrap();
            for (a, b) in rebuilt.points.as_slice().iter().zip(cloud.points.as_slice()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        // Method-of-snapshots oracle: eigenvalues of the Gram matrix.
        let n = clouds.len();
        let gram = DMatrix::<f64>::from_fn(n, n, |i, j| {
            clouds[i]
                .points
                .as_slice()
                .iter()
                .zip(clouds[j].points.as_slice())
                .map(|(a, b)| a * b)
                .sum()
        });
        let mut eig: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (i, l) in eig.iter().enumerate() {
            let sigma = l.max(0.0).sqrt();
            assert!(
                (sigma - pod.singular_values[i]).abs() < 1e-8,
                "singular value {i}: svd {} vs gram {sigma}",
                pod.singular_values[i]
            );
        }
        // Orthonormality under the Frobenius inner product.
        let gram_modes = pod.modes.transpose() * &pod.modes;
        assert!((gram_modes - DMatrix::identity(pod.n_modes(), pod.n_modes())).norm() < 1e-10);
        // Truncation error equals the tail of squared singular values.
        for m in 0..pod.n_modes() {
            let mut err2 = 0.0;
            for (k, cloud) in clouds.iter().enumerate() {
                let mut coeffs = DVector::zeros(pod.n_modes());
                for i in 0..m {
                    coeffs[i] = pod.coefficients[(k, i)];
                }
                let rebuilt = pod.synthesize(&coeffs, 0).unwrap();
                err2 += rebuilt
                    .points
                    .as_slice()
                    .iter()
                    .zip(cloud.points.as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
            }
            let tail: f64 = (m..pod.n_modes()).map(|i| pod.singular_values[i].powi(2)).sum();
            assert!((err2 - tail).abs() < 1e-10, "truncation at {m}: {err2} vs {tail}");
        }
    }

    #[test]
    fn rbf_fit_zero_values_gives_zero_weights() {
        let params = params_1d(&[0.0, 0.5, 1.0]);
        let w = rbf_fit(&params, &[0.0, 0.0, 0.0], 0.0, 0.4).unwrap();
        assert!(w.iter().all(|&x| x.abs() < 1e-14));
    }

    #[test]
    fn rbf_interpolates_at_zero_ridge() {
        let params = params_1d(&[0.0, 0.3, 0.6, 1.0]);
        let values = [1.0, -0.5, 0.25, 2.0];
        let w = rbf_fit(&params, &values, 0.0, 0.35).unwrap();
        for (k, &v) in values.iter().enumerate() {
            let pred = rbf_eval(&params, &w, 0.35, params.get(k));
            assert!((pred - v).abs() < 1e-8);
        }
    }

    #[test]
    fn ridge_training_residual_monotone_in_lambda() {
        let params = params_1d(&[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        let values: Vec<f64> = params.iter().map(|m| (3.0 * m[0]).sin()).collect();
        let mut prev = -1.0;
        for lambda in [0.0, 1e-6, 1e-4, 1e-2, 1.0] {
            let w = rbf_fit(&params, &values, lambda, 0.4).unwrap();
            let res: f64 = params
                .iter()
                .zip(&values)
                .map(|(m, &v)| (rbf_eval(&params, &w, 0.4, m) - v).powi(2))
                .sum();
            assert!(res >= prev - 1e-12, "residual decreased with lambda");
            prev = res;
        }
    }

    #[test]
    fn ridge_beats_interpolation_on_noisy_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mus: Vec<f64> = (0..20).map(|k| k as f64 / 19.0 * 2.0).collect();
        let params = params_1d(&mus);
        let values: Vec<f64> = mus
            .iter()
            .map(|&m| (3.0 * m).sin() + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let width = 0.5 * mean_pairwise_distance(&params);
        let w0 = rbf_fit(&params, &values, 0.0, width).unwrap();
        let w1 = rbf_fit(&params, &values, 1e-3, width).unwrap();
        let mut rmse0 = 0.0;
        let mut rmse1 = 0.0;
        for k in 0..200 {
            let m = [k as f64 / 199.0 * 2.0];
            let truth = (3.0 * m[0]).sin();
            rmse0 += (rbf_eval(&params, &w0, width, &m) - truth).powi(2);
            rmse1 += (rbf_eval(&params, &w1, width, &m) - truth).powi(2);
        }
        assert!(rmse1 < rmse0, "ridge rmse {rmse1} should beat interpolation rmse {rmse0}");
    }

    #[test]
    fn cv_returns_single_grid_point_verbatim() {
        let params = params_1d(&[0.0, 0.5, 1.0]);
        let coeffs = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 4.0]);
        let cv = cross_validate(&params, &coeffs, &[1e-3], &[0.7]).unwrap();
        assert_eq!(cv.lambda, 1e-3);
        assert_eq!(cv.width, 0.7);
    }

    #[test]
    fn cv_constant_data_ties_break_to_strongest_regularization() {
        let params = params_1d(&[0.0, 0.5, 1.0, 1.5]);
        let coeffs = DMatrix::from_column_slice(4, 1, &[2.5, 2.5, 2.5, 2.5]);
        let lambdas = [1e-6, 1e-3, 1e-1];
        let widths = [0.3, 0.6];
        let cv = cross_validate(&params, &coeffs, &lambdas, &widths).unwrap();
        assert_eq!(cv.lambda, 1e-1);
        assert_eq!(cv.width, 0.6);
        assert_eq!(cv.r2_oos[0], f64::NEG_INFINITY);
    }

    #[test]
    fn cv_keeps_smooth_mode_and_drops_noise_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mus: Vec<f64> = (0..12).map(|k| k as f64 / 11.0).collect();
        let params = params_1d(&mus);
        let mut coeffs = DMatrix::<f64>::zeros(12, 2);
        for (k, &m) in mus.iter().enumerate() {
            coeffs[(k, 0)] = (2.0 * m).sin() + 2.0;
            coeffs[(k, 1)] = rng.random_range(-1.0..1.0);
        }
        let mean_dist = mean_pairwise_distance(&params);
        let widths: Vec<f64> = [0.25, 0.5, 1.0, 2.0].iter().map(|s| s * mean_dist).collect();
        let lambdas: Vec<f64> = (0..8).map(|k| 10f64.powi(-8 + k)).collect();
        let cv = cross_validate(&params, &coeffs, &lambdas, &widths).unwrap();
        assert!(cv.r2_oos[0] > 0.5, "smooth mode r2 = {}", cv.r2_oos[0]);
        assert!(cv.r2_oos[1] <= 0.5, "noise mode r2 = {}", cv.r2_oos[1]);
    }

    #[test]
    fn cv_is_deterministic() {
        let params = params_1d(&[0.0, 0.25, 0.5, 0.75, 1.0]);
        let coeffs = DMatrix::from_column_slice(5, 1, &[0.0, 0.3, 0.9, 1.1, 1.8]);
        let lambdas: Vec<f64> = (0..8).map(|k| 10f64.powi(-8 + k)).collect();
        let a = cross_validate(&params, &coeffs, &lambdas, &[0.2, 0.4]).unwrap();
        let b = cross_validate(&params, &coeffs, &lambdas, &[0.2, 0.4]).unwrap();
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        assert_eq!(a.width.to_bits(), b.width.to_bits());
        assert_eq!(a.r2_oos[0].to_bits(), b.r2_oos[0].to_bits());
    }

    #[test]
    fn predictor_snaps_exactly_at_training_parameters() {
        let mus: Vec<f64> = (0..8).map(|k| k as f64 / 7.0).collect();
        let params = params_1d(&mus);
        let clouds: Vec<SortedPointCloud> = mus
            .iter()
            .map(|&m| cloud_1d(&[0.3 + 0.4 * m, 0.35 + 0.4 * m, 0.4 + 0.4 * m]))
            .collect();
        let pred = fit_predictor(&params, &clouds, &RegressionConfig::default()).unwrap();
        for (k, &m) in mus.iter().enumerate() {
            let c = pred.predict(&[m]).unwrap();
            assert_eq!(c.points.as_slice(), clouds[k].points.as_slice(), "snap at {m}");
        }
    }

    #[test]
    fn predictor_single_training_point_is_constant() {
        let params = params_1d(&[0.5]);
        let clouds = vec![cloud_1d(&[0.1, 0.2])];
        let pred = fit_predictor(&params, &clouds, &RegressionConfig::default()).unwrap();
        let c = pred.predict(&[0.5]).unwrap();
        assert_eq!(c.points.as_slice(), clouds[0].points.as_slice());
    }

    #[test]
    fn predictor_tracks_translating_cloud() {
        let mus: Vec<f64> = (0..9).map(|k| k as f64 / 8.0).collect();
        let params = params_1d(&mus);
        let c_of = |m: f64| 0.3 + 0.4 * m;
        let clouds: Vec<SortedPointCloud> = mus
            .iter()
            .map(|&m| cloud_1d(&[c_of(m) - 0.02, c_of(m), c_of(m) + 0.02]))
            .collect();
        let pred = fit_predictor(&params, &clouds, &RegressionConfig::default()).unwrap();
        let mu = 3.0 / 8.0 + 0.5 / 8.0; // midway between two training nodes
        let c = pred.predict(&[mu]).unwrap();
        assert!((c.points.get(1)[0] - c_of(mu)).abs() < 1e-2, "predicted center off");
    }

    #[test]
    fn extrapolation_guard_rejects_far_queries() {
        let params = params_1d(&[0.0, 1.0]);
        let clouds = vec![cloud_1d(&[0.0]), cloud_1d(&[1.0])];
        let pred = fit_predictor(&params, &clouds, &RegressionConfig::default()).unwrap();
        assert!(pred.predict(&[1.4]).is_ok());
        assert!(pred.predict(&[2.1]).is_err());
    }

    #[test]
    fn linear_mode_is_exact_for_affine_cloud_motion() {
        let mut params = Points::zeros(0, 2);
        params.push(&[0.0, 0.0]);
        params.push(&[1.0, 0.0]);
        params.push(&[0.0, 1.0]);
        let clouds: Vec<SortedPointCloud> = (0..3)
            .map(|k| {
                let m = params.get(k);
                cloud_1d(&[0.1 + 0.2 * m[0] + 0.3 * m[1]])
            })
            .collect();
        let pred = fit_predictor(&params, &clouds, &RegressionConfig::default()).unwrap();
        let c = pred.predict(&[0.25, 0.25]).unwrap();
        assert_relative_eq!(c.points.get(0)[0], 0.1 + 0.2 * 0.25 + 0.3 * 0.25, epsilon = 1e-12);
    }

    #[test]
    fn barycentric_weights_are_rototranslation_equivariant() {
        let mut params = Points::zeros(0, 2);
        params.push(&[0.0, 0.0]);
        params.push(&[1.0, 0.1]);
        params.push(&[0.2, 0.9]);
        let mu = [0.4, 0.3];
        let w = barycentric_weights(&params, &mu).unwrap();
        let th = 0.7f64;
        let rot = |x: &[f64]| {
            [
                th.cos() * x[0] - th.sin() * x[1] + 3.0,
                th.sin() * x[0] + th.cos() * x[1] - 1.5,
            ]
        };
        let mut tp = Points::zeros(0, 2);
        for k in 0..3 {
            tp.push(&rot(params.get(k)));
        }
        let wt = barycentric_weights(&tp, &rot(&mu)).unwrap();
        for (a, b) in w.iter().zip(&wt) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }
}
