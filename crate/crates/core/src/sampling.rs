//! Random matrix constructions shared by the estimators, the experiment
//! harness, and the property batteries.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matops::{fro_norm, Mat};

/// Standard complex Gaussian scalar (unit variance per real component).
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// m x n matrix of i.i.d. standard complex Gaussians.
pub fn complex_gaussian_mat<R: Rng>(m: usize, n: usize, rng: &mut R) -> Mat {
    let data = (0..m * n).map(|_| complex_gaussian(rng)).collect();
    Mat::new(m, n, data).expect("gaussian entries are finite")
}

/// Complex Gaussian p-vector.
pub fn complex_gaussian_vec<R: Rng>(p: usize, rng: &mut R) -> Vec<Complex64> {
    (0..p).map(|_| complex_gaussian(rng)).collect()
}

/// Random rank-r matrix G H^H normalized to unit Frobenius norm.
pub fn random_rank_r_unit<R: Rng>(m: usize, n: usize, r: usize, rng: &mut R) -> Mat {
    assert!(r >= 1 && r <= m.min(n), "rank out of range");
    loop {
        let g = complex_gaussian_mat(m, r, rng);
        let h = complex_gaussian_mat(n, r, rng);
        let x = g.matmul(&h.h());
        let nrm = fro_norm(&x);
        if nrm > 1e-12 {
            return x.scale_re(1.0 / nrm);
        }
    }
}

/// Unit-Frobenius matrix with no rank restriction.
pub fn random_unit_mat<R: Rng>(m: usize, n: usize, rng: &mut R) -> Mat {
    loop {
        let x = complex_gaussian_mat(m, n, rng);
        let nrm = fro_norm(&x);
        if nrm > 1e-12 {
            return x.scale_re(1.0 / nrm);
        }
    }
}

/// Haar-distributed unitary: Gram-Schmidt of a square complex Gaussian with
/// positive-real normalization.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> Mat {
    let g = complex_gaussian_mat(n, n, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.col(j);
        for b in &cols {
            let coef: Complex64 = v.iter().zip(b.iter()).map(|(a, c)| c.conj() * a).sum();
            for i in 0..n {
                v[i] -= coef * b[i];
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(nrm > 1e-12, "degenerate Gaussian draw");
        for z in v.iter_mut() {
            *z /= nrm;
        }
        cols.push(v);
    }
    let mut u = Mat::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            u.set(i, j, c[i]);
        }
    }
    u
}

/// `extra` random unit columns orthonormal to the columns of `basis` (and to
/// each other).
pub fn orthonormal_completion<R: Rng>(basis: &Mat, extra: usize, rng: &mut R) -> Mat {
    let m = basis.rows();
    assert!(basis.cols() + extra <= m, "not enough dimensions to complete");
    let mut cols: Vec<Vec<Complex64>> = (0..basis.cols()).map(|j| basis.col(j)).collect();
    let mut out = Mat::zeros(m, extra);
    let mut added = 0;
    while added < extra {
        let mut v: Vec<Complex64> = (0..m).map(|_| complex_gaussian(rng)).collect();
        for b in &cols {
            let coef: Complex64 = v.iter().zip(b.iter()).map(|(a, c)| c.conj() * a).sum();
            for i in 0..m {
                v[i] -= coef * b[i];
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm < 1e-6 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= nrm;
        }
        for i in 0..m {
            out.set(i, added, v[i]);
        }
        cols.push(v);
        added += 1;
    }
    out
}

/// Pair (X, Y) whose singular frames are mutually orthogonal.
///
/// Columns of a Haar unitary are split into disjoint blocks for the two row
/// spaces; when `disjoint_cols` is set the column spaces are split as well
/// (which additionally forces X Y^H = 0 and X^H Y = 0).
pub fn frame_orthogonal_pair<R: Rng>(
    m: usize,
    n: usize,
    r1: usize,
    r2: usize,
    disjoint_cols: bool,
    rng: &mut R,
) -> (Mat, Mat) {
    assert!(r1 + r2 <= m, "row spaces do not fit");
    assert!(if disjoint_cols { r1 + r2 <= n } else { r1.max(r2) <= n });
    let u = haar_unitary(m, rng);
    let v = haar_unitary(n, rng);

    let u1 = block_cols(&u, 0, r1);
    let u2 = block_cols(&u, r1, r2);
    let (v1, v2) = if disjoint_cols {
        (block_cols(&v, 0, r1), block_cols(&v, r1, r2))
    } else {
        (block_cols(&v, 0, r1), block_cols(&v, 0, r2))
    };

    let c1 = complex_gaussian_mat(r1, r1, rng);
    let c2 = complex_gaussian_mat(r2, r2, rng);
    let x = u1.matmul(&c1).matmul(&v1.h());
    let y = u2.matmul(&c2).matmul(&v2.h());
    (x, y)
}

fn block_cols(m: &Mat, start: usize, count: usize) -> Mat {
    let mut out = Mat::zeros(m.rows(), count);
    for j in 0..count {
        for i in 0..m.rows() {
            out.set(i, j, m.get(i, start + j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::{fro_norm, inner, svd, Mat};
    use crate::rng::stream;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = stream(1, 0);
        let u = haar_unitary(5, &mut rng);
        let g = u.h().matmul(&u);
        assert!(fro_norm(&g.sub(&Mat::identity(5))) < 1e-10);
    }

    #[test]
    fn rank_r_sampler_has_unit_norm_and_rank() {
        let mut rng = stream(2, 0);
        let x = random_rank_r_unit(6, 5, 2, &mut rng);
        assert!((fro_norm(&x) - 1.0).abs() < 1e-12);
        assert_eq!(crate::matops::rank(&x), 2);
    }

    #[test]
    fn frame_orthogonal_pair_frames_are_orthogonal() {
        let mut rng = stream(3, 0);
        for disjoint in [true, false] {
            let (x, y) = frame_orthogonal_pair(6, 6, 2, 2, disjoint, &mut rng);
            let fx = svd(&x).unwrap();
            let fy = svd(&y).unwrap();
            for j in 0..fx.rank() {
                for k in 0..fy.rank() {
                    let ip = inner(&fx.frame_atom(j), &fy.frame_atom(k)).unwrap();
                    assert!(ip.norm() <= 1e-10, "frame overlap {:.3e}", ip.norm());
                }
            }
            if disjoint {
                assert!(fro_norm(&x.matmul(&y.h())) < 1e-10);
                assert!(fro_norm(&x.h().matmul(&y)) < 1e-10);
            }
        }
    }

    #[test]
    fn completion_extends_basis() {
        let mut rng = stream(4, 0);
        let u = haar_unitary(6, &mut rng).first_cols(2);
        let ext = orthonormal_completion(&u, 3, &mut rng);
        for j in 0..3 {
            for i in 0..2 {
                let ip: num_complex::Complex64 = (0..6)
                    .map(|t| u.get(t, i).conj() * ext.get(t, j))
                    .sum();
                assert!(ip.norm() < 1e-10);
            }
        }
        let g = ext.h().matmul(&ext);
        assert!(fro_norm(&g.sub(&Mat::identity(3))) < 1e-10);
    }
}
