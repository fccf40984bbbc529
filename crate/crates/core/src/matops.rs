//! Dense complex matrix kernel.
//!
//! Everything downstream works over `C^{m x n}` with the trace inner product
//! `<X, Y> = Tr(Y^H X)`. This module provides the value type [`Mat`], a
//! deterministic one-sided Jacobi SVD, the three norms in use (Frobenius,
//! nuclear, spectral), best rank-r truncation, and singular value
//! soft-thresholding (the proximal map of the nuclear norm).

use num_complex::Complex64;
use thiserror::Error;

/// Relative threshold for counting a singular value as nonzero:
/// sigma_j is part of the numerical rank iff sigma_j > RANK_RTOL * sigma_1.
pub const RANK_RTOL: f64 = 1e-10;

/// Jacobi sweep convergence: rotations stop once every column pair has
/// |<w_p, w_q>| <= JACOBI_TOL * ||w_p|| * ||w_q||.
const JACOBI_TOL: f64 = 1e-13;

/// Hard cap on Jacobi sweeps before reporting non-convergence.
const JACOBI_MAX_SWEEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    #[error("entry buffer length {len} does not match {rows}x{cols}")]
    BadLength { rows: usize, cols: usize, len: usize },
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: {lhs_rows}x{lhs_cols} vs {rhs_rows}x{rhs_cols}")]
    ShapeMismatch {
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },
    #[error("rank {r} out of range for a {rows}x{cols} matrix")]
    RankOutOfRange { r: usize, rows: usize, cols: usize },
    #[error("Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    SvdNoConvergence { sweeps: usize, residual: f64 },
}

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Mat {
    /// Validating constructor: positive shape, matching length, finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, MatError> {
        if rows == 0 || cols == 0 {
            return Err(MatError::EmptyShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(MatError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        for (k, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(MatError::NonFinite {
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    /// Real diagonal matrix of the given shape; `diag` may be shorter than
    /// `min(rows, cols)`, remaining diagonal entries are zero.
    pub fn from_real_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }

    /// Build from real entries in row-major order.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, MatError> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn same_shape(&self, other: &Mat) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    fn shape_err(&self, other: &Mat) -> MatError {
        MatError::ShapeMismatch {
            lhs_rows: self.rows,
            lhs_cols: self.cols,
            rhs_rows: other.rows,
            rhs_cols: other.cols,
        }
    }

    /// Hermitian transpose.
    pub fn h(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert!(self.same_shape(other), "add: shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert!(self.same_shape(other), "sub: shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Mat {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul: inner dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + a * other.get(k, j));
                }
            }
        }
        out
    }

    /// Column-major vectorization (the global convention for operators).
    pub fn vec_col_major(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self.get(i, j));
            }
        }
        v
    }

    /// Inverse of [`Mat::vec_col_major`].
    pub fn from_vec_col_major(rows: usize, cols: usize, v: &[Complex64]) -> Result<Self, MatError> {
        if v.len() != rows * cols {
            return Err(MatError::BadLength {
                rows,
                cols,
                len: v.len(),
            });
        }
        let mut m = Mat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, v[j * rows + i]);
            }
        }
        Ok(m)
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Keep the first `k` columns.
    pub fn first_cols(&self, k: usize) -> Mat {
        assert!(k >= 1 && k <= self.cols);
        let mut out = Mat::zeros(self.rows, k);
        for i in 0..self.rows {
            for j in 0..k {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Trace over the leading min(m, n) diagonal entries.
    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

// ─── vector helpers ─────────────────────────────────────────────────────────

/// Euclidean inner product `<x, y> = y^H x` on C^p.
pub fn vec_inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), y.len(), "vec_inner: length mismatch");
    x.iter().zip(y).map(|(a, b)| b.conj() * a).sum()
}

/// Euclidean norm on C^p.
pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// ─── norms and inner product ────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Frobenius,
    Nuclear,
    Spectral,
}

/// Trace inner product `<X, Y> = Tr(Y^H X)`.
pub fn inner(x: &Mat, y: &Mat) -> Result<Complex64, MatError> {
    if !x.same_shape(y) {
        return Err(x.shape_err(y));
    }
    Ok(x
        .data
        .iter()
        .zip(&y.data)
        .map(|(a, b)| b.conj() * a)
        .sum())
}

/// Frobenius norm, computed entrywise (no factorization).
pub fn fro_norm(x: &Mat) -> f64 {
    x.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Norm dispatch. Nuclear and spectral norms go through the SVD.
pub fn norm(x: &Mat, kind: NormKind) -> f64 {
    match kind {
        NormKind::Frobenius => fro_norm(x),
        NormKind::Nuclear => singular_values(x).iter().sum(),
        NormKind::Spectral => singular_values(x).first().copied().unwrap_or(0.0),
    }
}

pub fn nuclear_norm(x: &Mat) -> f64 {
    norm(x, NormKind::Nuclear)
}

pub fn spectral_norm(x: &Mat) -> f64 {
    norm(x, NormKind::Spectral)
}

// ─── SVD ────────────────────────────────────────────────────────────────────

/// Thin singular value decomposition `X = U diag(sigma) V^H` with
/// `k = min(m, n)` triplets, sigma sorted nonincreasing, and a deterministic
/// phase convention (the largest-modulus entry of each left vector is real
/// nonnegative, ties broken by lowest row index).
#[derive(Debug, Clone)]
pub struct Svd {
    /// m x k, orthonormal columns.
    pub left: Mat,
    /// k nonnegative values, nonincreasing.
    pub sigmas: Vec<f64>,
    /// n x k, orthonormal columns.
    pub right: Mat,
}

impl Svd {
    /// `U diag(sigma) V^H`.
    pub fn reconstruct(&self) -> Mat {
        let m = self.left.rows();
        let n = self.right.rows();
        let mut out = Mat::zeros(m, n);
        for (j, &s) in self.sigmas.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let us = self.left.get(i, j) * s;
                for l in 0..n {
                    let cur = out.get(i, l);
                    out.set(i, l, cur + us * self.right.get(l, j).conj());
                }
            }
        }
        out
    }

    /// Numerical rank: count of sigma_j > RANK_RTOL * sigma_1.
    pub fn rank(&self) -> usize {
        match self.sigmas.first() {
            Some(&s1) if s1 > 0.0 => self.sigmas.iter().filter(|&&s| s > RANK_RTOL * s1).count(),
            _ => 0,
        }
    }

    /// Rank-one frame matrix `psi_j = u_j v_j^H`.
    pub fn frame_atom(&self, j: usize) -> Mat {
        let m = self.left.rows();
        let n = self.right.rows();
        let mut out = Mat::zeros(m, n);
        for i in 0..m {
            let u = self.left.get(i, j);
            for l in 0..n {
                out.set(i, l, u * self.right.get(l, j).conj());
            }
        }
        out
    }
}

/// One-sided Jacobi SVD. Column pairs of the working matrix are rotated
/// until mutually orthogonal; sweeps run in fixed lexicographic order so the
/// factorization is deterministic. Wide matrices are factored through their
/// adjoint.
pub fn svd(x: &Mat) -> Result<Svd, MatError> {
    if !x.is_finite() {
        return Err(MatError::NonFinite { row: 0, col: 0 });
    }
    if x.rows() >= x.cols() {
        let (u, s, v) = jacobi_tall(x)?;
        Ok(apply_phase_convention(Svd {
            left: u,
            sigmas: s,
            right: v,
        }))
    } else {
        let (u, s, v) = jacobi_tall(&x.h())?;
        // X^H = U S V^H  =>  X = V S U^H
        Ok(apply_phase_convention(Svd {
            left: v,
            sigmas: s,
            right: u,
        }))
    }
}

/// Singular values only (still runs the full factorization; desk scale).
pub fn singular_values(x: &Mat) -> Vec<f64> {
    svd(x)
        .expect("Jacobi SVD failed to converge on finite input")
        .sigmas
}

/// Numerical rank of a matrix at the RANK_RTOL * sigma_1 threshold.
pub fn rank(x: &Mat) -> usize {
    svd(x)
        .expect("Jacobi SVD failed to converge on finite input")
        .rank()
}

fn jacobi_tall(x: &Mat) -> Result<(Mat, Vec<f64>, Mat), MatError> {
    let m = x.rows();
    let n = x.cols();
    debug_assert!(m >= n);

    let mut w = x.clone();
    let mut v = Mat::identity(n);

    let mut residual = 0.0f64;
    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut max_rel = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                // Gram entries of the column pair.
                let mut hpp = 0.0;
                let mut hqq = 0.0;
                let mut hpq = Complex64::ZERO;
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    hpp += wp.norm_sqr();
                    hqq += wq.norm_sqr();
                    hpq += wp.conj() * wq;
                }
                if hpp == 0.0 || hqq == 0.0 {
                    continue;
                }
                let off = hpq.norm();
                let rel = off / (hpp * hqq).sqrt();
                if rel > max_rel {
                    max_rel = rel;
                }
                if rel <= JACOBI_TOL {
                    continue;
                }

                // Phase of the coupling, then a real Jacobi rotation.
                let phase = hpq / off; // e^{i phi}
                let tau = (hqq - hpp) / (2.0 * off);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                let sp = Complex64::new(s, 0.0) * phase; // s e^{i phi}
                let spc = sp.conj();
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    w.set(i, p, wp * c - wq * spc);
                    w.set(i, q, wp * sp + wq * c);
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, vp * c - vq * spc);
                    v.set(i, q, vp * sp + vq * c);
                }
            }
        }
        residual = max_rel;
        if max_rel <= JACOBI_TOL {
            converged = true;
            break;
        }
    }
    if !converged && n > 1 {
        return Err(MatError::SvdNoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            residual,
        });
    }

    // Column norms are the singular values; sort descending (stable).
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w.get(i, j).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));

    let mut left = Mat::zeros(m, n);
    let mut right = Mat::zeros(n, n);
    let mut sigmas = Vec::with_capacity(n);
    let mut filled: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigmas.push(s);
        if s > 0.0 {
            let u: Vec<Complex64> = (0..m).map(|i| w.get(i, src) / s).collect();
            for i in 0..m {
                left.set(i, dst, u[i]);
            }
            filled.push(u);
        } else {
            // Zero singular value: complete the left factor deterministically
            // with a unit vector orthogonal to the columns built so far.
            let u = orthonormal_fill(m, &filled);
            for i in 0..m {
                left.set(i, dst, u[i]);
            }
            filled.push(u);
        }
        for i in 0..n {
            right.set(i, dst, v.get(i, src));
        }
    }

    Ok((left, sigmas, right))
}

/// First standard basis vector with a sizable component outside `built`,
/// orthogonalized and normalized.
fn orthonormal_fill(m: usize, built: &[Vec<Complex64>]) -> Vec<Complex64> {
    for cand in 0..m {
        let mut u = vec![Complex64::ZERO; m];
        u[cand] = Complex64::ONE;
        for b in built {
            let coef: Complex64 = u
                .iter()
                .zip(b.iter())
                .map(|(a, c)| c.conj() * a)
                .sum();
            for i in 0..m {
                u[i] -= coef * b[i];
            }
        }
        let nrm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.5 {
            for z in u.iter_mut() {
                *z /= nrm;
            }
            return u;
        }
    }
    unreachable!("orthonormal completion exists by dimension count");
}

/// Rotate each triplet so the largest-modulus entry of the left vector is
/// real nonnegative; ties break at the lowest row index.
fn apply_phase_convention(mut f: Svd) -> Svd {
    let m = f.left.rows();
    let n = f.right.rows();
    for j in 0..f.sigmas.len() {
        let mut best = 0usize;
        let mut best_mod = -1.0f64;
        for i in 0..m {
            let a = f.left.get(i, j).norm();
            if a > best_mod + 1e-15 {
                best_mod = a;
                best = i;
            }
        }
        let pivot = f.left.get(best, j);
        let a = pivot.norm();
        if a == 0.0 {
            continue;
        }
        let phase = pivot / a;
        let pc = phase.conj();
        for i in 0..m {
            let z = f.left.get(i, j);
            f.left.set(i, j, z * pc);
        }
        for i in 0..n {
            let z = f.right.get(i, j);
            f.right.set(i, j, z * pc);
        }
    }
    f
}

// ─── rank-r truncation and soft thresholding ────────────────────────────────

/// Best rank-r approximation (Eckart-Young): keep the top r triplets.
pub fn best_rank_r(x: &Mat, r: usize) -> Result<Mat, MatError> {
    let k = x.rows().min(x.cols());
    if r < 1 || r > k {
        return Err(MatError::RankOutOfRange {
            r,
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let f = svd(x)?;
    let mut out = Mat::zeros(x.rows(), x.cols());
    for j in 0..r {
        let s = f.sigmas[j];
        if s == 0.0 {
            break;
        }
        for i in 0..x.rows() {
            let us = f.left.get(i, j) * s;
            for l in 0..x.cols() {
                let cur = out.get(i, l);
                out.set(i, l, cur + us * f.right.get(l, j).conj());
            }
        }
    }
    Ok(out)
}

/// Singular value soft thresholding `U max(Sigma - tau, 0) V^H`; the proximal
/// map of `tau * ||.||_*`.
pub fn svt(x: &Mat, tau: f64) -> Mat {
    assert!(tau >= 0.0, "svt: negative threshold");
    if tau == 0.0 {
        return x.clone();
    }
    let f = svd(x).expect("Jacobi SVD failed to converge on finite input");
    let mut out = Mat::zeros(x.rows(), x.cols());
    for (j, &s) in f.sigmas.iter().enumerate() {
        let sh = s - tau;
        if sh <= 0.0 {
            break; // sigmas nonincreasing
        }
        for i in 0..x.rows() {
            let us = f.left.get(i, j) * sh;
            for l in 0..x.cols() {
                let cur = out.get(i, l);
                out.set(i, l, cur + us * f.right.get(l, j).conj());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::sampling::{complex_gaussian_mat, haar_unitary, random_rank_r_unit};

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!(
            (a - b).abs() <= tol,
            "{what}: {a} vs {b} (diff {:.3e})",
            (a - b).abs()
        );
    }

    #[test]
    fn svd_diagonal_sorted() {
        let x = Mat::from_real_diag(2, 2, &[3.0, 4.0]);
        let f = svd(&x).unwrap();
        assert_close(f.sigmas[0], 4.0, 1e-12, "sigma1");
        assert_close(f.sigmas[1], 3.0, 1e-12, "sigma2");
    }

    #[test]
    fn svd_zero_matrix() {
        let x = Mat::zeros(3, 2);
        let f = svd(&x).unwrap();
        assert_eq!(f.sigmas, vec![0.0, 0.0]);
        // Left factor still orthonormal.
        let g = f.left.h().matmul(&f.left);
        assert!(fro_norm(&g.sub(&Mat::identity(2))) < 1e-12);
        assert_eq!(f.rank(), 0);
    }

    #[test]
    fn svd_reconstruction_random() {
        for seed in 0..20u64 {
            let mut rng = stream(41, seed);
            let x = complex_gaussian_mat(5, 4, &mut rng);
            let f = svd(&x).unwrap();
            let rel = fro_norm(&f.reconstruct().sub(&x)) / fro_norm(&x);
            assert!(rel <= 1e-10, "reconstruction rel err {rel:.3e}");
            let gu = f.left.h().matmul(&f.left);
            let gv = f.right.h().matmul(&f.right);
            assert!(fro_norm(&gu.sub(&Mat::identity(4))) < 1e-10);
            assert!(fro_norm(&gv.sub(&Mat::identity(4))) < 1e-10);
            for i in 0..f.sigmas.len() - 1 {
                assert!(f.sigmas[i] >= f.sigmas[i + 1]);
            }
        }
    }

    #[test]
    fn svd_wide_matrix() {
        let mut rng = stream(42, 0);
        let x = complex_gaussian_mat(3, 7, &mut rng);
        let f = svd(&x).unwrap();
        assert_eq!(f.left.rows(), 3);
        assert_eq!(f.left.cols(), 3);
        assert_eq!(f.right.rows(), 7);
        let rel = fro_norm(&f.reconstruct().sub(&x)) / fro_norm(&x);
        assert!(rel <= 1e-10);
    }

    #[test]
    fn svd_phase_convention_deterministic() {
        let mut rng = stream(43, 1);
        let x = complex_gaussian_mat(6, 4, &mut rng);
        let f1 = svd(&x).unwrap();
        let f2 = svd(&x).unwrap();
        assert_eq!(f1.left, f2.left);
        assert_eq!(f1.right, f2.right);
        // Largest-modulus entry of each left vector is real nonnegative.
        for j in 0..4 {
            let col = f1.left.col(j);
            let (mut idx, mut m) = (0usize, -1.0f64);
            for (i, z) in col.iter().enumerate() {
                if z.norm() > m + 1e-15 {
                    m = z.norm();
                    idx = i;
                }
            }
            let piv = col[idx];
            assert!(piv.im.abs() < 1e-12 && piv.re >= 0.0, "pivot {piv}");
        }
    }

    #[test]
    fn norms_diag_345() {
        let x = Mat::from_real_diag(2, 2, &[3.0, 4.0]);
        assert_close(norm(&x, NormKind::Frobenius), 5.0, 1e-12, "fro");
        assert_close(norm(&x, NormKind::Nuclear), 7.0, 1e-12, "nuc");
        assert_close(norm(&x, NormKind::Spectral), 4.0, 1e-12, "spec");
    }

    #[test]
    fn inner_identity_and_disjoint() {
        let i2 = Mat::identity(2);
        assert_close(inner(&i2, &i2).unwrap().re, 2.0, 1e-14, "tr I2");

        // X = e1 e2^H, Y = e2 e1^H have disjoint supports.
        let mut x = Mat::zeros(2, 2);
        x.set(0, 1, Complex64::ONE);
        let mut y = Mat::zeros(2, 2);
        y.set(1, 0, Complex64::ONE);
        assert!(inner(&x, &y).unwrap().norm() < 1e-15);
    }

    #[test]
    fn inner_is_squared_fro() {
        let mut rng = stream(44, 7);
        let x = complex_gaussian_mat(4, 5, &mut rng);
        let ip = inner(&x, &x).unwrap();
        assert!(ip.im.abs() < 1e-10);
        assert_close(ip.re, fro_norm(&x).powi(2), 1e-9, "<X,X> = ||X||_F^2");
    }

    #[test]
    fn inner_shape_mismatch_errors() {
        let x = Mat::zeros(2, 3);
        let y = Mat::zeros(3, 2);
        assert!(matches!(
            inner(&x, &y),
            Err(MatError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn best_rank_r_diagonal() {
        let x = Mat::from_real_diag(2, 2, &[3.0, 1.0]);
        let xr = best_rank_r(&x, 1).unwrap();
        assert!(fro_norm(&xr.sub(&Mat::from_real_diag(2, 2, &[3.0, 0.0]))) < 1e-12);
    }

    #[test]
    fn best_rank_r_already_low_rank() {
        let mut rng = stream(45, 2);
        let x = random_rank_r_unit(6, 5, 2, &mut rng);
        let xr = best_rank_r(&x, 3).unwrap();
        assert!(fro_norm(&xr.sub(&x)) <= 1e-10);
    }

    #[test]
    fn best_rank_r_tail_error() {
        let x = Mat::from_real_diag(3, 3, &[5.0, 4.0, 3.0]);
        let xr = best_rank_r(&x, 2).unwrap();
        assert_close(fro_norm(&x.sub(&xr)), 3.0, 1e-12, "tail sigma");
    }

    #[test]
    fn best_rank_r_out_of_range() {
        let x = Mat::zeros(3, 2);
        assert!(best_rank_r(&x, 0).is_err());
        assert!(best_rank_r(&x, 3).is_err());
    }

    #[test]
    fn svt_closed_forms() {
        let x = Mat::from_real_diag(2, 2, &[3.0, 1.0]);
        let y = svt(&x, 2.0);
        assert!(fro_norm(&y.sub(&Mat::from_real_diag(2, 2, &[1.0, 0.0]))) < 1e-12);

        let mut rng = stream(46, 3);
        let z = complex_gaussian_mat(4, 4, &mut rng);
        assert!(fro_norm(&svt(&z, 0.0).sub(&z)) == 0.0);

        let tau = spectral_norm(&z) + 0.1;
        assert!(fro_norm(&svt(&z, tau)) < 1e-12);
    }

    #[test]
    fn svt_matches_per_sigma_form_on_diagonals() {
        let d = [4.0, 2.5, 0.4];
        let x = Mat::from_real_diag(3, 3, &d);
        for tau in [0.0, 0.3, 1.0, 2.5, 5.0] {
            let y = svt(&x, tau);
            let want: Vec<f64> = d.iter().map(|&s| (s - tau).max(0.0)).collect();
            assert!(fro_norm(&y.sub(&Mat::from_real_diag(3, 3, &want))) < 1e-12, "tau={tau}");
        }
    }

    #[test]
    fn nuclear_fro_sandwich_with_rank() {
        let mut rng = stream(47, 0);
        for _ in 0..50 {
            let x = complex_gaussian_mat(7, 5, &mut rng);
            let f = fro_norm(&x);
            let nuc = nuclear_norm(&x);
            let r = rank(&x) as f64;
            assert!(f <= nuc * (1.0 + 1e-9));
            assert!(nuc <= r.sqrt() * f * (1.0 + 1e-9));
        }
    }

    #[test]
    fn unitary_invariance_of_norms() {
        let mut rng = stream(48, 0);
        for _ in 0..10 {
            let x = complex_gaussian_mat(5, 4, &mut rng);
            let u = haar_unitary(5, &mut rng);
            let v = haar_unitary(4, &mut rng);
            let y = u.matmul(&x).matmul(&v.h());
            for kind in [NormKind::Frobenius, NormKind::Nuclear, NormKind::Spectral] {
                let a = norm(&x, kind);
                let b = norm(&y, kind);
                assert!((a - b).abs() <= 1e-9 * a.max(1e-30), "{kind:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eckart_young_spot_check() {
        let mut rng = stream(49, 0);
        let x = complex_gaussian_mat(6, 5, &mut rng);
        let r = 2;
        let best = fro_norm(&x.sub(&best_rank_r(&x, r).unwrap()));
        for _ in 0..100 {
            let z = random_rank_r_unit(6, 5, r, &mut rng).scale_re(fro_norm(&x));
            assert!(fro_norm(&x.sub(&z)) >= best - 1e-9);
        }
    }

    #[test]
    fn variational_principle_bound_and_attainment() {
        let mut rng = stream(50, 0);
        for _ in 0..10 {
            let x = complex_gaussian_mat(4, 3, &mut rng);
            let nuc = nuclear_norm(&x);
            let u = haar_unitary(4, &mut rng);
            let v = haar_unitary(3, &mut rng);
            let t = u.h().matmul(&x).matmul(&v).trace().re;
            assert!(t <= nuc * (1.0 + 1e-9), "Re tr = {t} > nuclear {nuc}");

            // Attained at the singular factors.
            let f = svd(&x).unwrap();
            let t_star = f.left.h().matmul(&x).matmul(&f.right).trace().re;
            assert!((t_star - nuc).abs() <= 1e-9 * nuc.max(1e-30));
        }
    }

    #[test]
    fn mat_constructor_validation() {
        assert!(matches!(
            Mat::new(0, 2, vec![]),
            Err(MatError::EmptyShape { .. })
        ));
        assert!(matches!(
            Mat::new(2, 2, vec![Complex64::ZERO; 3]),
            Err(MatError::BadLength { .. })
        ));
        let mut bad = vec![Complex64::ZERO; 4];
        bad[2] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            Mat::new(2, 2, bad),
            Err(MatError::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn col_major_roundtrip() {
        let mut rng = stream(51, 0);
        let x = complex_gaussian_mat(3, 4, &mut rng);
        let v = x.vec_col_major();
        let y = Mat::from_vec_col_major(3, 4, &v).unwrap();
        assert_eq!(x, y);
    }
}
