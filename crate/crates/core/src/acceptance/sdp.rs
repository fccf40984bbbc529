//! Desk-scale interior-point oracle for the trace-heuristic semidefinite
//! form of affine nuclear norm minimization:
//!
//! ```text
//! minimize (Tr W1 + Tr W2) / 2
//! subject to Z = [[W1, X], [X^H, W2]] >= 0,  A vec(X) = b.
//! ```
//!
//! The optimal value equals ||X||_* and the X block of the minimizer is the
//! nuclear-norm minimizer. This is a reference implementation used only for
//! cross-checking the production solver: a log-det barrier with exact
//! feasible-start Newton steps on the real parameterization of the Hermitian
//! variable. Everything here is self-contained (own Cholesky, own dense LU)
//! so it shares no code path with the solver it checks.

use num_complex::Complex64;

use crate::matops::{spectral_norm, Mat};
use crate::measurement::MeasOp;

/// One Hermitian basis element: up to two (row, col, value) entries.
#[derive(Clone)]
struct BasisElem {
    entries: Vec<(usize, usize, Complex64)>,
    /// Objective coefficient Tr(E)/2.
    cost: f64,
}

struct Parameterization {
    d: usize,
    elems: Vec<BasisElem>,
}

impl Parameterization {
    /// Diagonal entries first, then (re, im) pairs for each i < j.
    fn new(d: usize) -> Self {
        let mut elems = Vec::with_capacity(d * d);
        for i in 0..d {
            elems.push(BasisElem {
                entries: vec![(i, i, Complex64::ONE)],
                cost: 0.5,
            });
        }
        for i in 0..d {
            for j in (i + 1)..d {
                elems.push(BasisElem {
                    entries: vec![(i, j, Complex64::ONE), (j, i, Complex64::ONE)],
                    cost: 0.0,
                });
                elems.push(BasisElem {
                    entries: vec![(i, j, Complex64::I), (j, i, -Complex64::I)],
                    cost: 0.0,
                });
            }
        }
        Self { d, elems }
    }

    fn assemble(&self, theta: &[f64]) -> Mat {
        let mut z = Mat::zeros(self.d, self.d);
        for (t, e) in theta.iter().zip(&self.elems) {
            for &(i, j, v) in &e.entries {
                let cur = z.get(i, j);
                z.set(i, j, cur + v * *t);
            }
        }
        z
    }

    /// Parameter indices of the X block entry (row, m + col).
    fn x_entry_params(&self, d: usize, i: usize, jj: usize) -> (usize, usize) {
        // Off-diagonal pairs are laid out after the d diagonal params in
        // lexicographic (i, j) order, two params per pair.
        debug_assert!(i < jj);
        let mut idx = d;
        for a in 0..i {
            idx += 2 * (d - a - 1);
        }
        idx += 2 * (jj - i - 1);
        (idx, idx + 1)
    }
}

/// Cholesky factor of a Hermitian positive definite matrix; `None` when the
/// matrix is not PD.
fn cholesky(z: &Mat) -> Option<Vec<Vec<Complex64>>> {
    let d = z.rows();
    let mut l = vec![vec![Complex64::ZERO; d]; d];
    for j in 0..d {
        let mut s = z.get(j, j).re;
        for k in 0..j {
            s -= l[j][k].norm_sqr();
        }
        if s <= 0.0 || !s.is_finite() {
            return None;
        }
        let ljj = s.sqrt();
        l[j][j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut v = z.get(i, j);
            for k in 0..j {
                v -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = v / ljj;
        }
    }
    Some(l)
}

fn log_det_from_chol(l: &[Vec<Complex64>]) -> f64 {
    l.iter().enumerate().map(|(j, row)| 2.0 * row[j].re.ln()).sum()
}

/// Inverse via Cholesky solves against identity columns.
fn inverse_from_chol(l: &[Vec<Complex64>]) -> Mat {
    let d = l.len();
    let mut inv = Mat::zeros(d, d);
    for col in 0..d {
        // Forward solve L y = e_col.
        let mut y = vec![Complex64::ZERO; d];
        for i in 0..d {
            let mut v = if i == col { Complex64::ONE } else { Complex64::ZERO };
            for k in 0..i {
                v -= l[i][k] * y[k];
            }
            y[i] = v / l[i][i].re;
        }
        // Backward solve L^H x = y.
        let mut x = vec![Complex64::ZERO; d];
        for i in (0..d).rev() {
            let mut v = y[i];
            for k in (i + 1)..d {
                v -= l[k][i].conj() * x[k];
            }
            x[i] = v / l[i][i].re;
        }
        for i in 0..d {
            inv.set(i, col, x[i]);
        }
    }
    inv
}

/// Dense real LU solve with partial pivoting (KKT systems are small). Rows
/// are equilibrated first: barrier Hessian entries grow like t^2 while
/// constraint rows stay O(1), and the pivot test must survive that spread.
fn solve_real(a: &mut Vec<Vec<f64>>, b: &mut Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for r in 0..n {
        let scale = a[r].iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if scale > 0.0 {
            for x in a[r].iter_mut() {
                *x /= scale;
            }
            b[r] /= scale;
        }
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].abs();
        for r in (col + 1)..n {
            if a[r][col].abs() > best {
                best = a[r][col].abs();
                piv = r;
            }
        }
        if best < 1e-120 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for r in (col + 1)..n {
            let f = a[r][col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        for c in (i + 1)..n {
            v -= a[i][c] * x[c];
        }
        x[i] = v / a[i][i];
    }
    Some(x)
}

/// Keep a maximal linearly independent subset of constraint rows (the
/// real/imaginary split of an overdetermined consistent system is redundant).
/// Fails if a dependent row is inconsistent with the kept ones.
fn independent_rows(
    cons: &[Vec<f64>],
    rhs: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<f64>), String> {
    let ncols = cons.first().map_or(0, |r| r.len());
    let mut kept_rows: Vec<Vec<f64>> = Vec::new();
    let mut kept_rhs: Vec<f64> = Vec::new();
    // Echelon forms of the kept rows, with their pivot columns.
    let mut echelon: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for (row, &r0) in cons.iter().zip(rhs) {
        let mut work = row.clone();
        let mut rwork = r0;
        for (pc, erow, er) in &echelon {
            let f = work[*pc] / erow[*pc];
            if f != 0.0 {
                for c in 0..ncols {
                    work[c] -= f * erow[c];
                }
                rwork -= f * er;
            }
        }
        let scale = row.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        let (pivot, mag) = work
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |(bi, bv), (i, &v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bi, bv)
                }
            });
        if mag > 1e-10 * scale {
            kept_rows.push(row.clone());
            kept_rhs.push(r0);
            echelon.push((pivot, work, rwork));
        } else if rwork.abs() > 1e-7 * scale {
            return Err(format!(
                "inconsistent constraint row (residual {rwork:.3e})"
            ));
        }
    }
    Ok((kept_rows, kept_rhs))
}

/// Complex Gaussian elimination for the least-norm feasible start.
fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].norm();
        for r in (col + 1)..n {
            if a[r][col].norm() > best {
                best = a[r][col].norm();
                piv = r;
            }
        }
        if best < 1e-120 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for r in (col + 1)..n {
            let f = a[r][col] / d;
            if f == Complex64::ZERO {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::ZERO; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        for c in (i + 1)..n {
            v -= a[i][c] * x[c];
        }
        x[i] = v / a[i][i];
    }
    Some(x)
}

/// Solve `min ||X||_*` s.t. `A vec(X) = b` through the semidefinite trace
/// heuristic. Returns the X block of the barrier minimizer.
pub fn sdp_nuclear_min(a: &MeasOp, b: &[Complex64]) -> Result<Mat, String> {
    let (m, n, p) = (a.m(), a.n(), a.p());
    let d = m + n;
    let par = Parameterization::new(d);
    let nvars = par.elems.len();
    debug_assert_eq!(nvars, d * d);

    // Constraint rows: Re/Im of A vec(X) = b over the X-block parameters.
    let mut cons = vec![vec![0.0f64; nvars]; 2 * p];
    let mut rhs = vec![0.0f64; 2 * p];
    let op = a.op_matrix();
    for l in 0..p {
        rhs[2 * l] = b[l].re;
        rhs[2 * l + 1] = b[l].im;
        for j in 0..m {
            for k in 0..n {
                let coef = op.get(l, k * m + j); // column-major vec index
                if coef == Complex64::ZERO {
                    continue;
                }
                let (ire, iim) = par.x_entry_params(d, j, m + k);
                // X_jk = theta_re + i theta_im.
                cons[2 * l][ire] += coef.re;
                cons[2 * l][iim] -= coef.im;
                cons[2 * l + 1][ire] += coef.im;
                cons[2 * l + 1][iim] += coef.re;
            }
        }
    }

    let (cons, rhs) = independent_rows(&cons, &rhs)?;
    let ncons = cons.len();

    // Feasible start: least-norm X0 through whichever normal equations are
    // nonsingular for the operator shape, W blocks scaled past the spectral
    // norm of X0.
    let mn = m * n;
    let x0 = if p <= mn {
        // Underdetermined: vec = M^H (M M^H)^{-1} b.
        let mut gram = vec![vec![Complex64::ZERO; p]; p];
        for r in 0..p {
            for c in 0..p {
                let mut acc = Complex64::ZERO;
                for j in 0..mn {
                    acc += op.get(r, j) * op.get(c, j).conj();
                }
                gram[r][c] = acc;
            }
        }
        let y = solve_complex(gram, b.to_vec()).ok_or("operator Gram is singular")?;
        a.adjoint(&y).map_err(|e| e.to_string())?
    } else {
        // Overdetermined: vec = (M^H M)^{-1} M^H b, feasible only when b is
        // in the operator range.
        let mut gram = vec![vec![Complex64::ZERO; mn]; mn];
        for r in 0..mn {
            for c in 0..mn {
                let mut acc = Complex64::ZERO;
                for l in 0..p {
                    acc += op.get(l, r).conj() * op.get(l, c);
                }
                gram[r][c] = acc;
            }
        }
        let mhb: Vec<Complex64> = (0..mn)
            .map(|j| (0..p).map(|l| op.get(l, j).conj() * b[l]).sum())
            .collect();
        let v = solve_complex(gram, mhb).ok_or("operator Gram is singular")?;
        Mat::from_vec_col_major(m, n, &v).map_err(|e| e.to_string())?
    };
    {
        let residual: f64 = a
            .apply(&x0)
            .map_err(|e| e.to_string())?
            .iter()
            .zip(b)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if residual > 1e-8 * scale.max(1.0) {
            return Err(format!("b is not in the operator range (residual {residual:.3e})"));
        }
    }
    let s0 = spectral_norm(&x0) * 1.5 + 1.0;

    let mut theta = vec![0.0f64; nvars];
    for i in 0..d {
        theta[i] = s0;
    }
    for j in 0..m {
        for k in 0..n {
            let (ire, iim) = par.x_entry_params(d, j, m + k);
            let v = x0.get(j, k);
            theta[ire] = v.re;
            theta[iim] = v.im;
        }
    }

    let barrier_dim = d as f64;
    let mut t = 1.0f64;
    let mu = 10.0f64;
    let gap_tol = 1e-9;

    while barrier_dim / t > gap_tol {
        // Newton iterations at this barrier weight.
        for _ in 0..60 {
            let z = par.assemble(&theta);
            let l = cholesky(&z).ok_or("iterate left the PSD cone")?;
            let s = inverse_from_chol(&l);

            // Gradient and Hessian of t * c'theta - log det Z.
            let mut grad = vec![0.0f64; nvars];
            for (k, e) in par.elems.iter().enumerate() {
                let mut tr = Complex64::ZERO;
                for &(i, j, v) in &e.entries {
                    tr += v * s.get(j, i);
                }
                grad[k] = t * e.cost - tr.re;
            }
            let mut kkt = vec![vec![0.0f64; nvars + ncons]; nvars + ncons];
            for k in 0..nvars {
                for lidx in k..nvars {
                    let mut acc = Complex64::ZERO;
                    for &(ka, kb, kv) in &par.elems[k].entries {
                        for &(la, lb, lv) in &par.elems[lidx].entries {
                            // Tr(S Ek S El) with sparse Ek, El.
                            acc += kv * lv * s.get(kb, la) * s.get(lb, ka);
                        }
                    }
                    kkt[k][lidx] = acc.re;
                    kkt[lidx][k] = acc.re;
                }
            }
            for (ci, row) in cons.iter().enumerate() {
                for k in 0..nvars {
                    kkt[nvars + ci][k] = row[k];
                    kkt[k][nvars + ci] = row[k];
                }
            }
            let mut rhs_kkt = vec![0.0f64; nvars + ncons];
            for k in 0..nvars {
                rhs_kkt[k] = -grad[k];
            }
            // Infeasible-start correction absorbs floating-point drift in
            // the equality constraints.
            for (ci, row) in cons.iter().enumerate() {
                let cur: f64 = row.iter().zip(&theta).map(|(c, t)| c * t).sum();
                rhs_kkt[nvars + ci] = rhs[ci] - cur;
            }
            let step =
                solve_real(&mut kkt, &mut rhs_kkt).ok_or("singular KKT system")?;
            let dtheta = &step[..nvars];

            let decrement: f64 = -grad
                .iter()
                .zip(dtheta)
                .map(|(g, d)| g * d)
                .sum::<f64>();
            if decrement / 2.0 < 1e-11 {
                break;
            }

            // Backtracking: stay PD, then require barrier decrease.
            let f0 = t * objective(&par, &theta) - log_det_from_chol(&l);
            let slope: f64 = grad.iter().zip(dtheta).map(|(g, d)| g * d).sum();
            let mut stepsize = 1.0f64;
            let mut accepted = false;
            for _ in 0..60 {
                let cand: Vec<f64> = theta
                    .iter()
                    .zip(dtheta)
                    .map(|(a, d)| a + stepsize * d)
                    .collect();
                if let Some(lc) = cholesky(&par.assemble(&cand)) {
                    let fc = t * objective(&par, &cand) - log_det_from_chol(&lc);
                    if fc <= f0 + 0.25 * stepsize * slope {
                        theta = cand;
                        accepted = true;
                        break;
                    }
                }
                stepsize *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        t *= mu;
    }

    let z = par.assemble(&theta);
    let mut x = Mat::zeros(m, n);
    for j in 0..m {
        for k in 0..n {
            x.set(j, k, z.get(j, m + k));
        }
    }
    Ok(x)
}

fn objective(par: &Parameterization, theta: &[f64]) -> f64 {
    par.elems
        .iter()
        .zip(theta)
        .map(|(e, t)| e.cost * t)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::{fro_norm, nuclear_norm};
    use crate::measurement::{gaussian_op, Field};
    use crate::rng::stream;
    use crate::sampling::complex_gaussian_mat;

    #[test]
    fn identity_operator_forces_x_and_value() {
        // p = mn pins the X block entirely; the optimal trace objective must
        // equal the nuclear norm of that X.
        let a = MeasOp::identity(3, 2);
        let x = complex_gaussian_mat(3, 2, &mut stream(130, 0));
        let b = a.apply(&x).unwrap();
        let xs = sdp_nuclear_min(&a, &b).unwrap();
        assert!(fro_norm(&xs.sub(&x)) <= 1e-6, "{:.3e}", fro_norm(&xs.sub(&x)));
        assert!((nuclear_norm(&xs) - nuclear_norm(&x)).abs() <= 1e-6);
    }

    #[test]
    fn underdetermined_solution_is_feasible_and_no_worse_than_least_norm() {
        let a = gaussian_op(3, 3, 10, 301, Field::Complex);
        let x = crate::sampling::random_rank_r_unit(3, 3, 1, &mut stream(131, 0));
        let b = a.apply(&x).unwrap();
        let xs = sdp_nuclear_min(&a, &b).unwrap();
        let res: f64 = a
            .apply(&xs)
            .unwrap()
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res <= 1e-7, "residual {res:.3e}");
        // The minimizer's nuclear norm cannot exceed the truth's.
        assert!(nuclear_norm(&xs) <= nuclear_norm(&x) + 1e-6);
    }
}

#[cfg(test)]
mod reduction_tests {
    use super::*;
    use crate::measurement::{gaussian_op, Field};
    use crate::rng::stream;

    #[test]
    fn overdetermined_rows_reduce_to_block_dimension() {
        let a = gaussian_op(3, 3, 10, 301, Field::Complex);
        let x = crate::sampling::random_rank_r_unit(3, 3, 1, &mut stream(131, 0));
        let b = a.apply(&x).unwrap();
        let (m, n, p) = (a.m(), a.n(), a.p());
        let d = m + n;
        let par = Parameterization::new(d);
        let nvars = par.elems.len();
        let mut cons = vec![vec![0.0f64; nvars]; 2 * p];
        let mut rhs = vec![0.0f64; 2 * p];
        let op = a.op_matrix();
        for l in 0..p {
            rhs[2 * l] = b[l].re;
            rhs[2 * l + 1] = b[l].im;
            for j in 0..m {
                for k in 0..n {
                    let coef = op.get(l, k * m + j);
                    let (ire, iim) = par.x_entry_params(d, j, m + k);
                    cons[2 * l][ire] += coef.re;
                    cons[2 * l][iim] -= coef.im;
                    cons[2 * l + 1][ire] += coef.im;
                    cons[2 * l + 1][iim] += coef.re;
                }
            }
        }
        let (kept, _) = independent_rows(&cons, &rhs).unwrap();
        // 20 real rows over an 18-real-dimensional X block: exactly 18 kept.
        assert_eq!(kept.len(), 18);
    }
}
