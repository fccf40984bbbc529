//! Nuclear norm minimization over the ellipsoidal feasible set
//! `{X : ||A X - b||_2 <= eps}` and its affine (eps = 0) special case.
//!
//! The workhorse is an accelerated proximal gradient loop (FISTA with a
//! monotone restart) on the penalized surrogate
//! `lambda ||X||_* + 1/2 ||A X - b||^2`; the proximal map of the nuclear
//! norm is singular value soft-thresholding. The ellipsoidal problem is
//! solved by bisection on lambda against the residual, which is
//! nondecreasing in lambda; the affine problem by geometric continuation
//! lambda_k = lambda_0 / 2^k. The step size comes from the spectral norm of
//! the operator matrix, so no line search is involved and solves are
//! deterministic.

use num_complex::Complex64;
use thiserror::Error;

use crate::matops::{self, fro_norm, svd, vec_norm, Mat};
use crate::measurement::{MeasError, MeasOp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("target residual {epsilon:.3e} unreachable; best achieved {min_residual:.3e} (epsilon below the distance from b to the operator range, or budget exhausted)")]
    Infeasible { epsilon: f64, min_residual: f64 },
    #[error("residual stalled at {min_residual:.3e} above target {target:.3e}")]
    Budget { target: f64, min_residual: f64 },
    #[error(transparent)]
    Meas(#[from] MeasError),
}

/// Knobs for the outer search and the inner proximal loop.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Lambda-search steps (bisection or continuation).
    pub max_outer: usize,
    /// Proximal iterations per lambda.
    pub max_inner: usize,
    /// Relative feasibility tolerance: the ellipsoid solve stops once the
    /// residual lands in `[eps (1 - feas_rtol), eps (1 + feas_rtol)]`.
    pub feas_rtol: f64,
    /// Relative iterate-change stopping tolerance for the inner loop.
    pub step_rtol: f64,
    /// Warm-start inner solves across lambda changes.
    pub continuation: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_outer: 60,
            max_inner: 2000,
            feas_rtol: 1e-4,
            step_rtol: 1e-8,
            continuation: true,
        }
    }
}

impl SolveOptions {
    /// Tightened options for near-exact solves (noiseless recovery and
    /// oracle comparisons).
    pub fn tight() -> Self {
        Self {
            max_outer: 80,
            max_inner: 4000,
            feas_rtol: 1e-10,
            step_rtol: 1e-12,
            continuation: true,
        }
    }
}

/// Outcome of an ellipsoidal or affine solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_star: Mat,
    /// `||A x_star - b||_2`.
    pub residual: f64,
    /// `||x_star||_*`.
    pub nuclear: f64,
    /// Total inner iterations across the lambda search.
    pub iterations: usize,
    pub lambda_final: f64,
    pub converged: bool,
    /// Subgradient residual of the returned iterate (see
    /// [`optimality_report`]).
    pub subopt_witness: f64,
}

/// KKT-style diagnostics for a candidate solution of the ellipsoidal
/// problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityReport {
    /// `max(0, ||A X - b|| - eps)`.
    pub feasibility_gap: f64,
    /// Distance from the scaled negative constraint gradient to the nuclear
    /// norm subdifferential at X (multiplier fitted by least squares).
    pub subgrad_residual: f64,
}

// ─── step size ──────────────────────────────────────────────────────────────

/// Squared spectral norm of the operator matrix, computed by power iteration
/// on the Hermitian Gram matrix with a fixed generic start (deterministic).
/// A small safety factor keeps 1/L a valid proximal-gradient step.
pub(crate) fn lipschitz(a: &MeasOp) -> f64 {
    let op = a.op_matrix();
    let mn = op.cols();
    let g = op.h().matmul(op);
    let mut v: Vec<Complex64> = (0..mn)
        .map(|i| Complex64::new(1.0 + 1e-3 * i as f64, 1e-4 * (i as f64 + 1.0)))
        .collect();
    let nrm = vec_norm(&v);
    for z in v.iter_mut() {
        *z /= nrm;
    }
    let mut lam = 0.0f64;
    for _ in 0..2000 {
        let mut w = vec![Complex64::ZERO; mn];
        for i in 0..mn {
            let mut acc = Complex64::ZERO;
            for j in 0..mn {
                acc += g.get(i, j) * v[j];
            }
            w[i] = acc;
        }
        let new_lam = crate::matops::vec_inner(&w, &v).re;
        let nw = vec_norm(&w);
        if nw < 1e-300 {
            return 1e-300;
        }
        for z in w.iter_mut() {
            *z /= nw;
        }
        v = w;
        if (new_lam - lam).abs() <= 1e-13 * new_lam.abs().max(1.0) {
            lam = new_lam;
            break;
        }
        lam = new_lam;
    }
    lam.max(1e-300) * (1.0 + 1e-6)
}

// ─── inner proximal loop ────────────────────────────────────────────────────

struct FistaOutcome {
    x: Mat,
    iters: usize,
    converged: bool,
}

/// Prox step returning the thresholded matrix and its nuclear norm (free
/// from the same factorization).
fn prox_nuclear(z: &Mat, tau: f64) -> (Mat, f64) {
    let f = svd(z).expect("Jacobi SVD failed on finite iterate");
    let mut out = Mat::zeros(z.rows(), z.cols());
    let mut nuc = 0.0;
    for (j, &s) in f.sigmas.iter().enumerate() {
        let sh = s - tau;
        if sh <= 0.0 {
            break;
        }
        nuc += sh;
        out = out.add(&f.frame_atom(j).scale_re(sh));
    }
    (out, nuc)
}

fn residual_norm(a: &MeasOp, x: &Mat, b: &[Complex64]) -> f64 {
    let ax = a.apply(x).expect("shape checked by caller");
    ax.iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Monotone FISTA on `lambda ||X||_* + 1/2 ||A X - b||^2`. On an objective
/// increase the momentum is dropped and the step recomputed from the current
/// iterate, so the recorded objective sequence never increases. The loop
/// stops on small relative iterate change, or as soon as the measured
/// residual drops to `residual_target` (used by continuation, where hitting
/// the target residual is the whole point of the stage).
fn fista(
    a: &MeasOp,
    b: &[Complex64],
    lambda: f64,
    lip: f64,
    x0: Mat,
    step_rtol: f64,
    max_inner: usize,
    residual_target: Option<f64>,
    mut trace: Option<&mut Vec<f64>>,
) -> FistaOutcome {
    let step = 1.0 / lip;
    let tau = lambda * step;

    let mut x = x0;
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut res = residual_norm(a, &x, b);
    let mut obj = lambda * matops::nuclear_norm(&x) + 0.5 * res * res;
    if let Some(tr) = trace.as_deref_mut() {
        tr.push(obj);
    }
    if residual_target.is_some_and(|target| res <= target) {
        return FistaOutcome {
            x,
            iters: 0,
            converged: true,
        };
    }

    let mut iters = 0usize;
    let mut converged = false;
    while iters < max_inner {
        iters += 1;

        let grad_y = grad(a, &y, b);
        let (mut x_next, mut nuc_next) = prox_nuclear(&y.sub(&grad_y.scale_re(step)), tau);
        let mut res_next = residual_norm(a, &x_next, b);
        let mut obj_next = lambda * nuc_next + 0.5 * res_next * res_next;

        if obj_next > obj {
            // Momentum overshoot: restart from the current iterate with a
            // plain proximal gradient step.
            t = 1.0;
            let grad_x = grad(a, &x, b);
            let redo = prox_nuclear(&x.sub(&grad_x.scale_re(step)), tau);
            x_next = redo.0;
            nuc_next = redo.1;
            res_next = residual_norm(a, &x_next, b);
            obj_next = lambda * nuc_next + 0.5 * res_next * res_next;
        }

        let delta = fro_norm(&x_next.sub(&x));
        let denom = fro_norm(&x_next).max(1e-30);

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = x_next.add(&x_next.sub(&x).scale_re(beta));
        x = x_next;
        t = t_next;
        obj = obj_next;
        res = res_next;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(obj);
        }

        if residual_target.is_some_and(|target| res <= target) {
            converged = true;
            break;
        }
        if delta <= step_rtol * denom {
            converged = true;
            break;
        }
    }

    FistaOutcome {
        x,
        iters,
        converged,
    }
}

fn grad(a: &MeasOp, x: &Mat, b: &[Complex64]) -> Mat {
    let ax = a.apply(x).expect("shape checked by caller");
    let r: Vec<Complex64> = ax.iter().zip(b).map(|(u, v)| u - v).collect();
    a.adjoint(&r).expect("length consistent")
}

// ─── public operations ──────────────────────────────────────────────────────

/// Approximate minimizer of `lambda ||X||_* + 1/2 ||A X - b||^2`.
pub fn solve_lagrangian(
    a: &MeasOp,
    b: &[Complex64],
    lambda: f64,
    opts: &SolveOptions,
) -> Result<Mat, SolveError> {
    assert!(lambda > 0.0, "penalty weight must be positive");
    check_len(a, b)?;
    let lip = lipschitz(a);
    let out = fista(
        a,
        b,
        lambda,
        lip,
        Mat::zeros(a.m(), a.n()),
        opts.step_rtol,
        opts.max_inner,
        None,
        None,
    );
    Ok(out.x)
}

/// Test hook: Lagrangian solve that also records the objective sequence.
#[cfg(test)]
pub(crate) fn solve_lagrangian_traced(
    a: &MeasOp,
    b: &[Complex64],
    lambda: f64,
    opts: &SolveOptions,
) -> (Mat, Vec<f64>) {
    let lip = lipschitz(a);
    let mut tr = Vec::new();
    let out = fista(
        a,
        b,
        lambda,
        lip,
        Mat::zeros(a.m(), a.n()),
        opts.step_rtol,
        opts.max_inner,
        None,
        Some(&mut tr),
    );
    (out.x, tr)
}

fn check_len(a: &MeasOp, b: &[Complex64]) -> Result<(), SolveError> {
    if b.len() != a.p() {
        return Err(SolveError::Meas(MeasError::VecLength {
            got: b.len(),
            want: a.p(),
        }));
    }
    Ok(())
}

/// Largest lambda that can matter: at `lambda >= ||A* b||_2` the zero matrix
/// minimizes the penalized objective.
fn lambda_zero(a: &MeasOp, b: &[Complex64]) -> f64 {
    matops::spectral_norm(&a.adjoint(b).expect("length checked"))
}

/// Minimize `||X||_*` subject to `||A X - b||_2 <= epsilon`.
///
/// With `||b|| <= epsilon` the zero matrix is returned immediately.
/// Otherwise lambda is bisected (geometrically) over
/// `[1e-8 lambda_0, lambda_0]` until the residual lands in the feasibility
/// window, warm-starting each inner solve; the returned iterate is always on
/// the feasible side `residual <= epsilon (1 + feas_rtol)`.
pub fn solve_ellipsoid(
    a: &MeasOp,
    b: &[Complex64],
    epsilon: f64,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    assert!(epsilon >= 0.0, "negative noise bound");
    check_len(a, b)?;
    if epsilon == 0.0 {
        return solve_affine(a, b, opts);
    }

    let nb = vec_norm(b);
    let lam0 = lambda_zero(a, b);
    if nb <= epsilon || lam0 == 0.0 {
        // Zero is feasible (or no direction ever improves the residual).
        if nb > epsilon * (1.0 + opts.feas_rtol) {
            return Err(SolveError::Infeasible {
                epsilon,
                min_residual: nb,
            });
        }
        return Ok(finish(a, b, epsilon, Mat::zeros(a.m(), a.n()), lam0, 0, true));
    }

    let lo_target = epsilon * (1.0 - opts.feas_rtol);
    let hi_target = epsilon * (1.0 + opts.feas_rtol);
    if nb <= hi_target {
        return Ok(finish(a, b, epsilon, Mat::zeros(a.m(), a.n()), lam0, 0, true));
    }

    let lip = lipschitz(a);
    let zero = Mat::zeros(a.m(), a.n());
    let mut total_iters = 0usize;

    let solve_at = |lambda: f64, warm: &Mat, iters: &mut usize| -> (Mat, f64, bool) {
        let start = if opts.continuation { warm.clone() } else { zero.clone() };
        let out = fista(
            a,
            b,
            lambda,
            lip,
            start,
            opts.step_rtol,
            opts.max_inner,
            None,
            None,
        );
        *iters += out.iters;
        let res = residual_norm(a, &out.x, b);
        (out.x, res, out.converged)
    };

    // Low end of the bracket must overshoot feasibility.
    let mut lam_lo = 1e-8 * lam0;
    let mut lam_hi = lam0;
    let (x_lo, res_lo, conv_lo) = solve_at(lam_lo, &zero, &mut total_iters);
    if res_lo >= lo_target {
        if res_lo <= hi_target {
            return Ok(finish(a, b, epsilon, x_lo, lam_lo, total_iters, conv_lo));
        }
        return Err(SolveError::Infeasible {
            epsilon,
            min_residual: res_lo,
        });
    }
    let mut feasible: (Mat, f64, bool) = (x_lo, lam_lo, conv_lo);
    let mut warm = feasible.0.clone();

    for _ in 0..opts.max_outer {
        let lam_mid = (lam_lo * lam_hi).sqrt();
        let (x_mid, res_mid, conv_mid) = solve_at(lam_mid, &warm, &mut total_iters);
        warm = x_mid.clone();
        if res_mid >= lo_target && res_mid <= hi_target {
            return Ok(finish(a, b, epsilon, x_mid, lam_mid, total_iters, conv_mid));
        }
        if res_mid > hi_target {
            lam_hi = lam_mid;
        } else {
            lam_lo = lam_mid;
            feasible = (x_mid, lam_mid, conv_mid);
        }
    }

    // Window never hit within budget; fall back to the best feasible-side
    // iterate (residual below the window, hence feasible).
    let (x, lam, conv) = feasible;
    Ok(finish(a, b, epsilon, x, lam, total_iters, conv))
}

/// Minimize `||X||_*` subject to `A X = b` (numerically: residual below
/// `max(feas_rtol ||b||, 1e-10)`), by geometric continuation
/// `lambda_k = lambda_0 / 2^k` with warm starts.
pub fn solve_affine(a: &MeasOp, b: &[Complex64], opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    check_len(a, b)?;
    let nb = vec_norm(b);
    let target = (opts.feas_rtol * nb).max(1e-10);
    if nb <= target {
        return Ok(finish(a, b, 0.0, Mat::zeros(a.m(), a.n()), 0.0, 0, true));
    }
    let lam0 = lambda_zero(a, b);
    if lam0 == 0.0 {
        return Err(SolveError::Infeasible {
            epsilon: 0.0,
            min_residual: nb,
        });
    }

    let lip = lipschitz(a);
    let mut x = Mat::zeros(a.m(), a.n());
    let mut total_iters = 0usize;
    let mut best_res = f64::INFINITY;
    let mut no_improve = 0usize;

    // Intermediate continuation stages only need to track the lambda path;
    // the in-loop residual target provides the real exit. The stage step
    // tolerance is laddered to the running residual so early stages run
    // loose and only the endgame pays for full accuracy.
    let mut res_prev = nb;
    for k in 0..opts.max_outer {
        let lam = lam0 * 0.5f64.powi(k as i32);
        let start = if opts.continuation {
            x.clone()
        } else {
            Mat::zeros(a.m(), a.n())
        };
        let stage_rtol = opts
            .step_rtol
            .max((1e-2 * res_prev / nb.max(1e-30)).min(1e-7));
        let out = fista(
            a,
            b,
            lam,
            lip,
            start,
            stage_rtol,
            opts.max_inner,
            Some(target),
            None,
        );
        total_iters += out.iters;
        x = out.x;
        let res = residual_norm(a, &x, b);
        res_prev = res;
        if res <= target {
            return Ok(finish(a, b, 0.0, x, lam, total_iters, out.converged));
        }
        if res >= best_res * (1.0 - 1e-3) {
            no_improve += 1;
            if no_improve >= 8 {
                return Err(SolveError::Budget {
                    target,
                    min_residual: best_res.min(res),
                });
            }
        } else {
            no_improve = 0;
        }
        best_res = best_res.min(res);
    }
    Err(SolveError::Budget {
        target,
        min_residual: best_res,
    })
}

fn finish(
    a: &MeasOp,
    b: &[Complex64],
    epsilon: f64,
    x: Mat,
    lambda_final: f64,
    iterations: usize,
    converged: bool,
) -> SolveResult {
    let residual = residual_norm(a, &x, b);
    let nuclear = matops::nuclear_norm(&x);
    let report = optimality_report(a, b, epsilon, &x);
    SolveResult {
        x_star: x,
        residual,
        nuclear,
        iterations,
        lambda_final,
        converged,
        subopt_witness: report.subgrad_residual,
    }
}

/// Feasibility and stationarity diagnostics at X.
///
/// The subdifferential of the nuclear norm at X with thin factors (U1, V1)
/// is `{U1 V1^H + W : U1^H W = 0, W V1 = 0, ||W||_2 <= 1}`. The report
/// measures the distance of `-mu grad ||A X - b||` to that set, with the
/// multiplier `mu >= 0` fitted by least squares on the support component.
pub fn optimality_report(a: &MeasOp, b: &[Complex64], epsilon: f64, x: &Mat) -> OptimalityReport {
    let ax = a.apply(x).expect("shape checked by caller");
    let rvec: Vec<Complex64> = ax.iter().zip(b).map(|(u, v)| u - v).collect();
    let res = vec_norm(&rvec);
    let feasibility_gap = (res - epsilon).max(0.0);

    let d = if res <= 1e-14 {
        Mat::zeros(x.rows(), x.cols())
    } else {
        a.adjoint(&rvec)
            .expect("length consistent")
            .scale_re(-1.0 / res)
    };

    let f = svd(x).expect("Jacobi SVD failed on finite input");
    let k = f.rank();
    let (support, corner, uv) = if k == 0 {
        (Mat::zeros(x.rows(), x.cols()), d.clone(), Mat::zeros(x.rows(), x.cols()))
    } else {
        let u1 = f.left.first_cols(k);
        let v1 = f.right.first_cols(k);
        let uv = u1.matmul(&v1.h());
        // Corner = (I - U1 U1^H) D (I - V1 V1^H); support = D - corner.
        let du = u1.matmul(&u1.h().matmul(&d));
        let dv = d.matmul(&v1).matmul(&v1.h());
        let duv = u1.matmul(&u1.h().matmul(&d.matmul(&v1))).matmul(&v1.h());
        let corner = d.sub(&du).sub(&dv).add(&duv);
        (d.sub(&corner), corner, uv)
    };

    let ss = fro_norm(&support).powi(2);
    let mu = if ss < 1e-30 {
        0.0
    } else {
        (matops::inner(&uv, &support).expect("same shape").re / ss).max(0.0)
    };

    let support_err = fro_norm(&support.scale_re(mu).sub(&uv));
    let corner_excess: f64 = matops::singular_values(&corner.scale_re(mu))
        .iter()
        .map(|&s| (s - 1.0).max(0.0).powi(2))
        .sum();
    OptimalityReport {
        feasibility_gap,
        subgrad_residual: (support_err * support_err + corner_excess).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::nuclear_norm;
    use crate::measurement::{gaussian_op, Field};
    use crate::rng::stream;
    use crate::sampling::{complex_gaussian_mat, complex_gaussian_vec, random_rank_r_unit};

    #[test]
    fn lagrangian_kills_small_data() {
        let a = gaussian_op(3, 3, 12, 1, Field::Complex);
        let mut rng = stream(90, 0);
        let x = complex_gaussian_mat(3, 3, &mut rng);
        let b = a.apply(&x).unwrap();
        // First-order condition: 0 is optimal iff ||A* b||_2 <= lambda.
        let lam0 = matops::spectral_norm(&a.adjoint(&b).unwrap());
        let sol = solve_lagrangian(&a, &b, lam0 * 1.01, &SolveOptions::default()).unwrap();
        assert!(fro_norm(&sol) <= 1e-12, "norm {}", fro_norm(&sol));
    }

    #[test]
    fn lagrangian_identity_is_one_prox() {
        let a = MeasOp::identity(3, 3);
        let mut rng = stream(91, 0);
        let x = complex_gaussian_mat(3, 3, &mut rng);
        let b = a.apply(&x).unwrap();
        let lam = 0.4;
        let mut opts = SolveOptions::default();
        opts.step_rtol = 1e-13;
        let sol = solve_lagrangian(&a, &b, lam, &opts).unwrap();
        let want = matops::svt(&x, lam);
        assert!(
            fro_norm(&sol.sub(&want)) <= 1e-8 * fro_norm(&want).max(1.0),
            "prox mismatch {:.3e}",
            fro_norm(&sol.sub(&want))
        );
    }

    #[test]
    fn lagrangian_zero_data() {
        let a = gaussian_op(3, 3, 10, 2, Field::Complex);
        let b = vec![Complex64::ZERO; 10];
        let sol = solve_lagrangian(&a, &b, 0.5, &SolveOptions::default()).unwrap();
        assert!(fro_norm(&sol) == 0.0);
    }

    #[test]
    fn objective_descent_with_restarts() {
        let a = gaussian_op(4, 4, 20, 3, Field::Complex);
        let mut rng = stream(92, 0);
        let x = random_rank_r_unit(4, 4, 2, &mut rng);
        let b = a.apply(&x).unwrap();
        let (_, trace) = solve_lagrangian_traced(&a, &b, 0.05, &SolveOptions::default());
        for w in trace.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0),
                "objective increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn ellipsoid_zero_when_b_small() {
        let a = gaussian_op(3, 3, 8, 4, Field::Complex);
        let b: Vec<Complex64> = complex_gaussian_vec(8, &mut stream(93, 0))
            .iter()
            .map(|z| z * 0.01)
            .collect();
        let eps = vec_norm(&b) + 0.1;
        let res = solve_ellipsoid(&a, &b, eps, &SolveOptions::default()).unwrap();
        assert_eq!(fro_norm(&res.x_star), 0.0);
        assert_eq!(res.nuclear, 0.0);
        assert!(res.converged);
    }

    #[test]
    fn ellipsoid_identity_matches_diagonal_kkt() {
        // For the identity operator the solution is svt(B, tau) with tau
        // solving sum min(sigma_i, tau)^2 = eps^2. With sigma = (3, 1) and
        // eps = 1 that gives tau = 1/sqrt(2): shrink both values by it.
        let a = MeasOp::identity(2, 2);
        let x0 = Mat::from_real_diag(2, 2, &[3.0, 1.0]);
        let b = a.apply(&x0).unwrap();
        let res = solve_ellipsoid(&a, &b, 1.0, &SolveOptions::default()).unwrap();
        let tau = 1.0 / 2.0f64.sqrt();
        let want = Mat::from_real_diag(2, 2, &[3.0 - tau, 1.0 - tau]);
        assert!(
            fro_norm(&res.x_star.sub(&want)) <= 1e-4,
            "oracle mismatch {:.3e}",
            fro_norm(&res.x_star.sub(&want))
        );
        assert!((res.residual - 1.0).abs() <= 1e-4 * 1.0 + 1e-12);
    }

    #[test]
    fn ellipsoid_window_and_optimality_sanity() {
        let mut opts = SolveOptions::default();
        opts.feas_rtol = 1e-6;
        for t in 0..5u64 {
            let a = gaussian_op(5, 5, 60, 700 + t, Field::Complex);
            let x = random_rank_r_unit(5, 5, 1, &mut stream(94, t));
            let eps = 0.05;
            let obs = a.observe(&x, eps, 7100 + t).unwrap();
            let res = solve_ellipsoid(&a, &obs.b, eps, &opts).unwrap();
            assert!(res.residual <= eps * (1.0 + opts.feas_rtol) + 1e-12);
            // X itself is feasible, so the minimizer cannot beat it by much.
            let nx = nuclear_norm(&x);
            assert!(
                res.nuclear <= nx * (1.0 + 1e-6),
                "trial {t}: nuclear {} vs truth {}",
                res.nuclear,
                nx
            );
            // ||A (x_star - X)|| <= 2 eps + slack.
            let diff = res.x_star.sub(&x);
            let adiff = vec_norm(&a.apply(&diff).unwrap());
            assert!(adiff <= 2.0 * eps + 1e-3 * eps);
        }
    }

    #[test]
    fn ellipsoid_residual_monotone_in_lambda() {
        let a = gaussian_op(4, 4, 30, 11, Field::Complex);
        let x = random_rank_r_unit(4, 4, 1, &mut stream(95, 0));
        let b = a.apply(&x).unwrap();
        let lam0 = matops::spectral_norm(&a.adjoint(&b).unwrap());
        let mut opts = SolveOptions::default();
        opts.step_rtol = 1e-11;
        let mut last = -1.0;
        for k in (0..=12).rev() {
            let lam = lam0 * 0.5f64.powi(k + 2);
            let sol = solve_lagrangian(&a, &b, lam, &opts).unwrap();
            let res = residual_norm(&a, &sol, &b);
            assert!(
                res >= last - 1e-6,
                "residual decreased along increasing lambda: {res} < {last}"
            );
            last = res;
        }
    }

    #[test]
    fn ellipsoid_infeasible_epsilon() {
        // p > mn: generic b keeps a component outside the operator range, so
        // a tiny epsilon is unreachable.
        let a = gaussian_op(3, 3, 20, 12, Field::Complex);
        let b = complex_gaussian_vec(20, &mut stream(96, 0));
        let err = solve_ellipsoid(&a, &b, 1e-9, &SolveOptions::default()).unwrap_err();
        match err {
            SolveError::Infeasible { min_residual, .. } => assert!(min_residual > 1e-6),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn affine_identity_recovers_b() {
        let a = MeasOp::identity(3, 3);
        let x = complex_gaussian_mat(3, 3, &mut stream(97, 0));
        let b = a.apply(&x).unwrap();
        let res = solve_affine(&a, &b, &SolveOptions::tight()).unwrap();
        assert!(
            fro_norm(&res.x_star.sub(&x)) <= 1e-8,
            "{:.3e}",
            fro_norm(&res.x_star.sub(&x))
        );
    }

    #[test]
    fn affine_zero_b() {
        let a = gaussian_op(3, 3, 9, 13, Field::Complex);
        let res = solve_affine(&a, &vec![Complex64::ZERO; 9], &SolveOptions::default()).unwrap();
        assert_eq!(fro_norm(&res.x_star), 0.0);
        assert!(res.converged);
    }

    #[test]
    fn affine_noiseless_rank1_recovery() {
        for t in 0..3u64 {
            let a = gaussian_op(6, 6, 60, 500 + t, Field::Complex);
            let x = random_rank_r_unit(6, 6, 1, &mut stream(98, t));
            let b = a.apply(&x).unwrap();
            let res = solve_affine(&a, &b, &SolveOptions::tight()).unwrap();
            let rel = fro_norm(&res.x_star.sub(&x));
            assert!(rel <= 1e-3, "trial {t}: rel err {rel:.3e}");
            assert!(res.converged);
        }
    }

    #[test]
    fn ellipsoid_delegates_affine_at_zero_eps() {
        let a = MeasOp::identity(2, 2);
        let x = Mat::from_real_diag(2, 2, &[2.0, 0.5]);
        let b = a.apply(&x).unwrap();
        let res = solve_ellipsoid(&a, &b, 0.0, &SolveOptions::tight()).unwrap();
        assert!(fro_norm(&res.x_star.sub(&x)) <= 1e-8);
    }

    #[test]
    fn optimality_report_cases() {
        let a = gaussian_op(3, 3, 12, 14, Field::Complex);
        // Zero matrix with feasible b: both diagnostics vanish.
        let small: Vec<Complex64> = complex_gaussian_vec(12, &mut stream(99, 0))
            .iter()
            .map(|z| z * 1e-3)
            .collect();
        let rep = optimality_report(&a, &small, 1.0, &Mat::zeros(3, 3));
        assert_eq!(rep.feasibility_gap, 0.0);
        assert!(rep.subgrad_residual <= 1e-12);

        // Truth with exact data: no feasibility gap.
        let x = random_rank_r_unit(3, 3, 1, &mut stream(99, 1));
        let b = a.apply(&x).unwrap();
        let rep = optimality_report(&a, &b, 0.0, &x);
        assert!(rep.feasibility_gap <= 1e-12);
    }

    #[test]
    fn optimality_witness_small_on_converged_solves() {
        let mut opts = SolveOptions::default();
        opts.feas_rtol = 1e-6;
        opts.step_rtol = 1e-10;
        for t in 0..3u64 {
            let a = gaussian_op(5, 5, 60, 800 + t, Field::Complex);
            let x = random_rank_r_unit(5, 5, 1, &mut stream(100, t));
            let eps = 0.1;
            let obs = a.observe(&x, eps, 8100 + t).unwrap();
            let res = solve_ellipsoid(&a, &obs.b, eps, &opts).unwrap();
            assert!(
                res.subopt_witness <= 1e-3,
                "trial {t}: witness {:.3e}",
                res.subopt_witness
            );
        }
    }
}
