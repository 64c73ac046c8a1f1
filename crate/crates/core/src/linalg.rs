//! Small numerical kernels: banded LU, symmetric matrix powers, golden-section
//! search, and a quasi-Newton minimizer with backtracking line search.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// General banded matrix with `kl` sub- and `ku` superdiagonals, stored
/// column-major with `kl` extra fill rows for partial-pivoting factorization.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    rows: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let rows = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, rows, ab: vec![0.0; rows * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.in_band(i, j), "entry ({i},{j}) outside band");
        (self.kl + self.ku + i - j) + j * self.rows
    }

    // Storage band: `kl` extra superdiagonals hold the fill created by row
    // swaps during factorization.
    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku + self.kl >= j && j + self.kl >= i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.slot(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let i0 = j.saturating_sub(self.ku);
            let i1 = (j + self.kl).min(self.n - 1);
            let xj = x[j];
            for i in i0..=i1 {
                y[i] += self.ab[self.slot(i, j)] * xj;
            }
        }
        y
    }

    /// LU factorization with partial pivoting (band variant).
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let kuf = self.ku + self.kl; // effective upper bandwidth after fill
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let i_max = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.ab[self.slot(j, j)].abs();
            for i in j + 1..=i_max {
                let v = self.ab[self.slot(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            if best == 0.0 {
                return Err(Error::numerical(format!("banded LU: zero pivot at column {j}")));
            }
            if p != j {
                let k_max = (j + kuf).min(n - 1);
                for k in j..=k_max {
                    let a = self.slot(j, k);
                    let b = self.slot(p, k);
                    self.ab.swap(a, b);
                }
            }
            let piv = self.ab[self.slot(j, j)];
            for i in j + 1..=i_max {
                let s = self.slot(i, j);
                let l = self.ab[s] / piv;
                self.ab[s] = l;
                if l != 0.0 {
                    let k_max = (j + kuf).min(n - 1);
                    for k in j + 1..=k_max {
                        let ujk = self.ab[self.slot(j, k)];
                        if ujk != 0.0 {
                            let t = self.slot(i, k);
                            self.ab[t] -= l * ujk;
                        }
                    }
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

/// Factored banded matrix ready for repeated solves.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let kl = self.m.kl;
        let kuf = self.m.ku + self.m.kl;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let i_max = (j + kl).min(n - 1);
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..=i_max {
                    x[i] -= self.m.ab[self.m.slot(i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.m.ab[self.m.slot(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                let i0 = j.saturating_sub(kuf);
                for i in i0..j {
                    x[i] -= self.m.ab[self.m.slot(i, j)] * xj;
                }
            }
        }
        x
    }
}

/// Symmetric eigendecomposition with an eigenvalue floor, returning
/// `Q diag(max(lambda, floor))^power Q^T`.
pub fn sym_power(m: &DMatrix<f64>, power: f64, floor: f64) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::invalid("sym_power needs a square matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("sym_power: non-finite matrix entries"));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        *v = v.max(floor).powf(power);
    }
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&vals) * q.transpose())
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_8;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Outcome of a quasi-Newton minimization.
#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: DVector<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective values after each accepted step (non-increasing).
    pub trace: Vec<f64>,
}

/// BFGS with Armijo backtracking. `fg` returns the objective and gradient.
pub fn bfgs<F>(mut fg: F, x0: DVector<f64>, grad_tol: f64, max_iter: usize) -> MinimizeResult
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut g) = fg(&x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut trace = vec![f];
    let mut iterations = 0;
    while iterations < max_iter {
        let gn = g.norm();
        if gn < grad_tol {
            return MinimizeResult { x, value: f, grad_norm: gn, iterations, converged: true, trace };
        }
        let mut p = -(&h * &g);
        if p.dot(&g) >= 0.0 {
            // Reset to steepest descent when the approximation degenerates.
            h = DMatrix::identity(n, n);
            p = -g.clone();
        }
        let slope = p.dot(&g);
        let mut alpha = 1.0;
        let mut accepted = false;
        let mut x_new = x.clone();
        let mut f_new = f;
        let mut g_new = g.clone();
        for _ in 0..60 {
            x_new = &x + &p * alpha;
            let (fv, gv) = fg(&x_new);
            if fv <= f + 1e-4 * alpha * slope {
                f_new = fv;
                g_new = gv;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return MinimizeResult { x, value: f, grad_norm: gn, iterations, converged: false, trace };
        }
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let sv = DMatrix::from_column_slice(n, 1, s.as_slice());
            let yv = DMatrix::from_column_slice(n, 1, y.as_slice());
            let i = DMatrix::<f64>::identity(n, n);
            let left = &i - &sv * yv.transpose() * rho;
            let right = &i - &yv * sv.transpose() * rho;
            h = &left * h * &right + &sv * sv.transpose() * rho;
        }
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(f);
        iterations += 1;
    }
    let gn = g.norm();
    MinimizeResult { x, value: f, grad_norm: gn, iterations, converged: gn < grad_tol, trace }
}

/// Solve a small dense symmetric positive definite system via Cholesky.
pub fn spd_solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::numerical("Cholesky failed: matrix not positive definite"))?;
    Ok(chol.solve(&b))
}
