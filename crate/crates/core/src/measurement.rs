//! Linear measurement operators `A : C^{m x n} -> C^p`.
//!
//! An operator is stored as its dense p x (mn) matrix acting on the
//! column-major vectorization of the input (the vectorization order is fixed
//! globally so operator files are portable). Gaussian ensembles are
//! normalized so that `E ||A X||_2^2 = ||X||_F^2`, which centers isometry
//! deviations at zero.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::matops::{vec_norm, Mat, MatError};
use crate::rng::stream;
use crate::sampling::complex_gaussian_vec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasError {
    #[error("operator matrix is {rows}x{cols}, expected {p}x{mn} for ({m}x{n}) -> C^{p}")]
    OpShape {
        rows: usize,
        cols: usize,
        p: usize,
        m: usize,
        n: usize,
        mn: usize,
    },
    #[error("input matrix is {rows}x{cols}, operator expects {m}x{n}")]
    InputShape {
        rows: usize,
        cols: usize,
        m: usize,
        n: usize,
    },
    #[error("vector length {got}, operator expects {want}")]
    VecLength { got: usize, want: usize },
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Scalar field of a Gaussian ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// Dense linear operator from m x n matrices to p-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasOp {
    m: usize,
    n: usize,
    p: usize,
    op_matrix: Mat, // p x (m n), acts on column-major vec(X)
}

impl MeasOp {
    pub fn from_op_matrix(m: usize, n: usize, op_matrix: Mat) -> Result<Self, MeasError> {
        let p = op_matrix.rows();
        if op_matrix.cols() != m * n || p == 0 {
            return Err(MeasError::OpShape {
                rows: op_matrix.rows(),
                cols: op_matrix.cols(),
                p,
                m,
                n,
                mn: m * n,
            });
        }
        Ok(Self { m, n, p, op_matrix })
    }

    /// Vectorization identity: p = mn, op_matrix = I.
    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            p: m * n,
            op_matrix: Mat::identity(m * n),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn op_matrix(&self) -> &Mat {
        &self.op_matrix
    }

    /// Operator with op_matrix scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            p: self.p,
            op_matrix: self.op_matrix.scale_re(c),
        }
    }

    /// `A X`: op_matrix times the column-major vectorization of X.
    pub fn apply(&self, x: &Mat) -> Result<Vec<Complex64>, MeasError> {
        if x.rows() != self.m || x.cols() != self.n {
            return Err(MeasError::InputShape {
                rows: x.rows(),
                cols: x.cols(),
                m: self.m,
                n: self.n,
            });
        }
        let v = x.vec_col_major();
        let mut out = vec![Complex64::ZERO; self.p];
        let mn = self.m * self.n;
        for (l, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for j in 0..mn {
                acc += self.op_matrix.get(l, j) * v[j];
            }
            *o = acc;
        }
        Ok(out)
    }

    /// `A* y`: un-vectorized op_matrix^H y; satisfies the adjoint identity
    /// `<A X, y> = <X, A* y>`.
    pub fn adjoint(&self, y: &[Complex64]) -> Result<Mat, MeasError> {
        if y.len() != self.p {
            return Err(MeasError::VecLength {
                got: y.len(),
                want: self.p,
            });
        }
        let mn = self.m * self.n;
        let mut v = vec![Complex64::ZERO; mn];
        for l in 0..self.p {
            let yl = y[l];
            if yl == Complex64::ZERO {
                continue;
            }
            for (j, vj) in v.iter_mut().enumerate() {
                *vj += self.op_matrix.get(l, j).conj() * yl;
            }
        }
        Ok(Mat::from_vec_col_major(self.m, self.n, &v)?)
    }

    /// Noisy observation `b = A X + nu` with the perturbation drawn
    /// uniformly on the radius-epsilon sphere (exactly on the sphere when
    /// epsilon > 0; the worst case admitted by the noise model).
    pub fn observe(
        &self,
        x: &Mat,
        epsilon: f64,
        noise_seed: u64,
    ) -> Result<Observation, MeasError> {
        assert!(epsilon >= 0.0, "negative noise bound");
        let mut b = self.apply(x)?;
        if epsilon > 0.0 {
            let mut rng = stream(noise_seed, 0x4e4f_4953); // noise substream tag
            let mut g = complex_gaussian_vec(self.p, &mut rng);
            let nrm = vec_norm(&g);
            if nrm < 1e-12 {
                g = vec![Complex64::ZERO; self.p];
                g[0] = Complex64::ONE;
            }
            let nrm = vec_norm(&g);
            for (bl, gl) in b.iter_mut().zip(&g) {
                *bl += gl * (epsilon / nrm);
            }
        }
        Ok(Observation {
            b,
            epsilon,
            noise_seed,
        })
    }
}

/// Measurement record: the observed vector, the noise bound and the seed the
/// perturbation was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub b: Vec<Complex64>,
    pub epsilon: f64,
    pub noise_seed: u64,
}

/// Gaussian measurement ensemble, i.i.d. zero-mean entries with variance
/// 1/p (complex: circularly symmetric, per-component variance 1/(2p)).
/// Deterministic in the seed.
pub fn gaussian_op(m: usize, n: usize, p: usize, seed: u64, field: Field) -> MeasOp {
    assert!(p >= 1 && m >= 1 && n >= 1, "positive dimensions required");
    let mut rng = stream(seed, 0x4f50_4d41); // operator substream tag
    let mn = m * n;
    let mut data = Vec::with_capacity(p * mn);
    match field {
        Field::Real => {
            let s = (1.0 / p as f64).sqrt();
            for _ in 0..p * mn {
                let g: f64 = rng.sample(StandardNormal);
                data.push(Complex64::new(s * g, 0.0));
            }
        }
        Field::Complex => {
            let s = (1.0 / (2.0 * p as f64)).sqrt();
            for _ in 0..p * mn {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                data.push(Complex64::new(s * re, s * im));
            }
        }
    }
    let op_matrix = Mat::new(p, mn, data).expect("gaussian entries are finite");
    MeasOp {
        m,
        n,
        p,
        op_matrix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::{fro_norm, vec_inner};
    use crate::sampling::{complex_gaussian_mat, random_unit_mat};

    #[test]
    fn identity_operator_vectorizes() {
        let a = MeasOp::identity(3, 2);
        let mut rng = stream(70, 0);
        let x = complex_gaussian_mat(3, 2, &mut rng);
        let y = a.apply(&x).unwrap();
        assert_eq!(y, x.vec_col_major());
        let back = a.adjoint(&y).unwrap();
        assert!(fro_norm(&back.sub(&x)) < 1e-14);
    }

    #[test]
    fn apply_zero_and_linearity() {
        let a = gaussian_op(4, 3, 10, 9, Field::Complex);
        let z = Mat::zeros(4, 3);
        assert!(vec_norm(&a.apply(&z).unwrap()) == 0.0);

        let mut rng = stream(71, 0);
        let x = complex_gaussian_mat(4, 3, &mut rng);
        let y = complex_gaussian_mat(4, 3, &mut rng);
        let (ca, cb) = (Complex64::new(1.3, -0.4), Complex64::new(-0.2, 2.1));
        let lhs = a.apply(&x.scale(ca).add(&y.scale(cb))).unwrap();
        let ax = a.apply(&x).unwrap();
        let ay = a.apply(&y).unwrap();
        let rhs: Vec<Complex64> = ax
            .iter()
            .zip(&ay)
            .map(|(u, v)| u * ca + v * cb)
            .collect();
        let dev: f64 = lhs
            .iter()
            .zip(&rhs)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dev <= 1e-10);
    }

    #[test]
    fn adjoint_identity_random_triples() {
        let mut rng = stream(72, 0);
        for t in 0..100u64 {
            let a = gaussian_op(3, 4, 7, 100 + t, Field::Complex);
            let x = complex_gaussian_mat(3, 4, &mut rng);
            let y = complex_gaussian_vec(7, &mut rng);
            let lhs = vec_inner(&a.apply(&x).unwrap(), &y);
            let rhs = crate::matops::inner(&x, &a.adjoint(&y).unwrap()).unwrap();
            assert!(
                (lhs - rhs).norm() <= 1e-10 * fro_norm(&x) * vec_norm(&y),
                "trial {t}: adjoint identity violated"
            );
        }
    }

    #[test]
    fn adjoint_shape_errors() {
        let a = gaussian_op(3, 3, 5, 1, Field::Real);
        assert!(matches!(
            a.apply(&Mat::zeros(2, 3)),
            Err(MeasError::InputShape { .. })
        ));
        assert!(matches!(
            a.adjoint(&[Complex64::ZERO; 4]),
            Err(MeasError::VecLength { got: 4, want: 5 })
        ));
    }

    #[test]
    fn gaussian_shape_and_determinism() {
        let a = gaussian_op(1, 1, 4, 5, Field::Complex);
        assert_eq!(a.op_matrix().rows(), 4);
        assert_eq!(a.op_matrix().cols(), 1);

        let b = gaussian_op(1, 1, 4, 5, Field::Complex);
        assert_eq!(a, b);
        let c = gaussian_op(1, 1, 4, 6, Field::Complex);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_isotropy_monte_carlo() {
        // E ||A X||^2 = ||X||_F^2 for unit-Frobenius X.
        let a = gaussian_op(8, 8, 2000, 77, Field::Complex);
        let mut rng = stream(78, 0);
        let mut acc = 0.0;
        let trials = 500;
        for _ in 0..trials {
            let x = random_unit_mat(8, 8, &mut rng);
            acc += vec_norm(&a.apply(&x).unwrap()).powi(2);
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() <= 0.05, "mean energy {mean}");
    }

    #[test]
    fn observe_exact_and_on_sphere() {
        let a = gaussian_op(4, 4, 12, 3, Field::Complex);
        let mut rng = stream(79, 0);
        let x = complex_gaussian_mat(4, 4, &mut rng);

        let clean = a.observe(&x, 0.0, 11).unwrap();
        let ax = a.apply(&x).unwrap();
        assert_eq!(clean.b, ax);

        let noisy = a.observe(&x, 0.3, 11).unwrap();
        let nu: Vec<Complex64> = noisy.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        assert!((vec_norm(&nu) - 0.3).abs() <= 1e-12);

        let again = a.observe(&x, 0.3, 11).unwrap();
        assert_eq!(noisy.b, again.b);
        let other = a.observe(&x, 0.3, 12).unwrap();
        assert_ne!(noisy.b, other.b);
    }

    #[test]
    fn scaled_operator_scales_measurements() {
        let a = gaussian_op(3, 3, 6, 21, Field::Complex);
        let c = 2.5;
        let ac = a.scaled(c);
        let mut rng = stream(80, 0);
        let x = complex_gaussian_mat(3, 3, &mut rng);
        let y1 = a.apply(&x).unwrap();
        let y2 = ac.apply(&x).unwrap();
        for (u, v) in y1.iter().zip(&y2) {
            assert!((u * c - v).norm() <= 1e-12);
        }
    }
}
