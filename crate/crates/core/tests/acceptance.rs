//! Acceptance suite: every release criterion at its pinned tolerance and
//! budget, one pass/fail line each (run with `--nocapture` to see the lines
//! for passing criteria too).

use nucrec_core::acceptance::{self, CriterionResult};

fn check(result: CriterionResult) {
    println!("{}", result.line());
    assert!(result.pass, "{}", result.line());
}

#[test]
fn criterion_01_norm_sandwich() {
    check(acceptance::criterion_1_norm_sandwich());
}

#[test]
fn criterion_02_nuclear_additivity() {
    check(acceptance::criterion_2_additivity());
}

#[test]
fn criterion_03_restricted_orthogonality() {
    check(acceptance::criterion_3_restricted_orthogonality());
}

#[test]
fn criterion_04_scalar_max_erratum() {
    check(acceptance::criterion_4_scalar_max_erratum());
}

#[test]
fn criterion_05_guarantee_constants() {
    check(acceptance::criterion_5_constants());
}

#[test]
fn criterion_06_identity_ellipsoid_oracle() {
    check(acceptance::criterion_6_identity_ellipsoid());
}

#[test]
fn criterion_07_noiseless_recovery() {
    check(acceptance::criterion_7_noiseless_recovery());
}

#[test]
fn criterion_08_bound_verification() {
    check(acceptance::criterion_8_bound_verification());
}

#[test]
fn criterion_09_certificate_chain() {
    check(acceptance::criterion_9_certificate_chain());
}

#[test]
fn criterion_10_sdp_cross_check() {
    check(acceptance::criterion_10_sdp_cross_check());
}

#[test]
fn criterion_11_determinism() {
    check(acceptance::criterion_11_determinism());
}
