//! Seeded property batteries for the norm identities the error-bound
//! derivation rests on. The CLI `lemmas` subcommand runs these and prints a
//! pass/fail summary, including the scalar-maximization erratum report.

use crate::guarantee::{lemma37_max, Lemma37Report};
use crate::matops::{fro_norm, nuclear_norm, rank, svd};
use crate::rip::rop_check;
use crate::rng::stream;
use crate::sampling::{complex_gaussian_mat, frame_orthogonal_pair, haar_unitary};
use crate::measurement::{gaussian_op, Field};
use rand::Rng;

/// Outcome of one battery: cases run, failures, and the worst relative
/// violation observed (negative when every case had margin).
#[derive(Debug, Clone)]
pub struct BatteryReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub worst: f64,
}

impl BatteryReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} ({} cases, worst violation {:.3e})",
            self.name,
            if self.pass() { "PASS" } else { "FAIL" },
            self.cases,
            self.worst
        )
    }
}

/// Norm sandwich: `||X||_F <= ||X||_* <= sqrt(rank X) ||X||_F`, within 1e-9
/// relative, over random complex matrices with sizes up to `max_m x max_n`.
pub fn norm_sandwich_battery(cases: usize, seed: u64, max_m: usize, max_n: usize) -> BatteryReport {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..cases {
        let mut rng = stream(seed, i as u64);
        let m = rng.random_range(1..=max_m);
        let n = rng.random_range(1..=max_n);
        let x = complex_gaussian_mat(m, n, &mut rng);
        let f = fro_norm(&x);
        let nuc = nuclear_norm(&x);
        let rt = (rank(&x) as f64).sqrt();
        let v1 = (f - nuc) / nuc.max(1e-300); // <= 0 when the lower bound holds
        let v2 = (nuc - rt * f) / (rt * f).max(1e-300);
        let v = v1.max(v2);
        worst = worst.max(v);
        if v > 1e-9 {
            failures += 1;
        }
    }
    BatteryReport {
        name: "norm sandwich (F <= * <= sqrt(r) F)",
        cases,
        failures,
        worst,
    }
}

/// Variational bound: `Re Tr(U^H X V) <= ||X||_*` for random unitary pairs,
/// with equality attained at the singular factors.
pub fn variational_battery(cases: usize, seed: u64) -> BatteryReport {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..cases {
        let mut rng = stream(seed.wrapping_add(1), i as u64);
        let m = rng.random_range(2..=6);
        let n = rng.random_range(2..=6);
        let x = complex_gaussian_mat(m, n, &mut rng);
        let nuc = nuclear_norm(&x);
        let u = haar_unitary(m, &mut rng);
        let v = haar_unitary(n, &mut rng);
        let t = u.h().matmul(&x).matmul(&v).trace().re;
        let mut viol = (t - nuc) / nuc.max(1e-300);

        // Attainment at the singular factors.
        let f = svd(&x).expect("finite input");
        let t_star = f.left.h().matmul(&x).matmul(&f.right).trace().re;
        viol = viol.max((t_star - nuc).abs() / nuc.max(1e-300) - 0.0);
        worst = worst.max(viol);
        if (t - nuc) / nuc.max(1e-300) > 1e-9 || (t_star - nuc).abs() > 1e-9 * nuc.max(1.0) {
            failures += 1;
        }
    }
    BatteryReport {
        name: "variational principle (Re Tr(U^H X V) <= ||X||_*)",
        cases,
        failures,
        worst,
    }
}

/// Nuclear norm additivity for pairs with `X Y^H = 0` and `X^H Y = 0`.
pub fn additivity_battery(cases: usize, seed: u64) -> BatteryReport {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..cases {
        let mut rng = stream(seed.wrapping_add(2), i as u64);
        let m = rng.random_range(4..=8);
        let n = rng.random_range(4..=8);
        let rmax = (m.min(n)) / 2;
        let r1 = rng.random_range(1..=rmax);
        let r2 = rng.random_range(1..=rmax);
        let (x, y) = frame_orthogonal_pair(m, n, r1, r2, true, &mut rng);
        debug_assert!(fro_norm(&x.matmul(&y.h())) <= 1e-9);
        debug_assert!(fro_norm(&x.h().matmul(&y)) <= 1e-9);
        let lhs = nuclear_norm(&x.add(&y));
        let rhs = nuclear_norm(&x) + nuclear_norm(&y);
        let v = (lhs - rhs).abs() / rhs.max(1e-300);
        worst = worst.max(v - 1e-9);
        if v > 1e-9 {
            failures += 1;
        }
    }
    BatteryReport {
        name: "nuclear additivity (X Y^H = 0 = X^H Y)",
        cases,
        failures,
        worst,
    }
}

/// Restricted-orthogonality chain on random (A, X, Y) with orthogonal
/// singular frames: `|<AX, AY>| <= sigma_max(cross block) ||X||_F ||Y||_F`
/// and `sigma_max(cross block) <= sigma_max(Gram - I)`.
pub fn restricted_orthogonality_battery(cases: usize, seed: u64) -> BatteryReport {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..cases {
        let mut rng = stream(seed.wrapping_add(3), i as u64);
        // Dimension ranges chosen so r1 + r2 <= min(m, n) always holds and
        // no case is ever skipped.
        let m = rng.random_range(4..=6);
        let n = rng.random_range(4..=6);
        let rmax = m.min(n) / 2;
        let r1 = rng.random_range(1..=rmax);
        let r2 = rng.random_range(1..=rmax);
        let p = rng.random_range(8..=30);
        let a = gaussian_op(m, n, p, seed ^ (i as u64) << 1, Field::Complex);
        let disjoint = i % 2 == 0;
        let (x, y) = frame_orthogonal_pair(m, n, r1, r2, disjoint, &mut rng);
        let c = match rop_check(&a, &x, &y) {
            Ok(c) => c,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let fx = fro_norm(&x);
        let fy = fro_norm(&y);
        let v1 = c.lhs - (c.submatrix_norm * fx * fy + 1e-9 * (c.submatrix_norm * fx * fy).max(1.0));
        let v2 = c.submatrix_norm - (c.gram_dev + 1e-9 * c.gram_dev.max(1.0));
        let v = v1.max(v2);
        worst = worst.max(v);
        if v > 0.0 {
            failures += 1;
        }
    }
    BatteryReport {
        name: "restricted orthogonality chain",
        cases,
        failures,
        worst,
    }
}

/// Scalar maximization reports for the standard test constants, flagging
/// whether the published value is exceeded by the numeric maximum.
pub fn scalar_max_reports() -> Vec<(f64, Lemma37Report)> {
    [0.5, 1.0, std::f64::consts::SQRT_2, 3.0]
        .into_iter()
        .map(|alpha| (alpha, lemma37_max(alpha)))
        .collect()
}

/// Check the scalar-maximization reports: the numeric maximum must match
/// `sqrt(1 + alpha^2)` within 1e-6 everywhere, and exceed the published
/// value at `alpha = sqrt(2)`.
pub fn scalar_max_battery() -> BatteryReport {
    let reports = scalar_max_reports();
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for (alpha, rep) in &reports {
        let want = (1.0 + alpha * alpha).sqrt();
        let dev = (rep.numeric_max - want).abs();
        worst = worst.max(dev - 1e-6);
        if dev > 1e-6 {
            failures += 1;
        }
        if (*alpha - std::f64::consts::SQRT_2).abs() < 1e-12
            && rep.numeric_max <= rep.paper_value
        {
            failures += 1;
        }
    }
    BatteryReport {
        name: "scalar max on the unit circle (erratum)",
        cases: reports.len(),
        failures,
        worst,
    }
}

/// Run every battery at the given budgets.
pub fn run_all(cases: usize, seed: u64) -> Vec<BatteryReport> {
    vec![
        norm_sandwich_battery(cases, seed, 12, 9),
        variational_battery(cases.min(300), seed),
        additivity_battery(cases.min(300), seed),
        restricted_orthogonality_battery(cases.min(200), seed),
        scalar_max_battery(),
    ]
}
