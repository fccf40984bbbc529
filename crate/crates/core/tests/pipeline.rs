//! End-to-end pipeline checks through the public API: file formats feeding
//! the solver, certificates on solved instances, and experiment runs in both
//! constant regimes.

use nucrec_core::guarantee::{certify, Mode};
use nucrec_core::harness::{
    run_experiment, DeltaMethodChoice, ExperimentConfig, TailMode,
};
use nucrec_core::io;
use nucrec_core::matops::{fro_norm, nuclear_norm};
use nucrec_core::measurement::{gaussian_op, Field};
use nucrec_core::rip::delta_mc;
use nucrec_core::rng::stream;
use nucrec_core::sampling::random_rank_r_unit;
use nucrec_core::solver::{solve_ellipsoid, SolveOptions};

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("nucrec_pipe_{}_{}", std::process::id(), name))
}

#[test]
fn file_roundtrip_through_solver_and_certificate() {
    let a = gaussian_op(6, 6, 60, 1234, Field::Complex);
    let x = random_rank_r_unit(6, 6, 1, &mut stream(61, 0));
    let eps = 0.05;
    let obs = a.observe(&x, eps, 17).unwrap();

    // Serialize everything, read it back, and work with the copies only.
    let op_path = tmp("op.txt");
    let x_path = tmp("x.txt");
    let obs_path = tmp("obs.txt");
    io::write_operator(&op_path, &a).unwrap();
    io::write_matrix(&x_path, &x).unwrap();
    io::write_observation(&obs_path, &obs).unwrap();

    let a2 = io::read_operator(&op_path).unwrap();
    let x2 = io::read_matrix(&x_path).unwrap();
    let obs2 = io::read_observation(&obs_path).unwrap();
    assert_eq!(a, a2);
    assert_eq!(x, x2);
    assert_eq!(obs2.epsilon, eps);

    let sol = solve_ellipsoid(&a2, &obs2.b, obs2.epsilon, &SolveOptions::default()).unwrap();
    assert!(sol.residual <= eps * (1.0 + 1e-4) + 1e-12);
    assert!(sol.nuclear <= nuclear_norm(&x2) * (1.0 + 1e-4));

    let est = delta_mc(&a2, 3, 500, 3).unwrap();
    let cert = certify(&a2, &x2, &sol.x_star, &obs2.b, obs2.epsilon, 1, &est, Mode::Corrected)
        .unwrap();
    assert!(cert.unconditional_pass());

    // Certificate CSV round trip structure.
    let csv = io::certificate_csv(&cert);
    assert_eq!(csv.lines().next().unwrap(), "label,lhs,rhs,slack,pass,flag");
    assert_eq!(csv.lines().count(), 1 + cert.total());

    for p in [&op_path, &x_path, &obs_path] {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn experiment_runs_in_both_modes() {
    for (mode, name) in [(Mode::Paper, "paper"), (Mode::Corrected, "corrected")] {
        let out = tmp(&format!("modes_{name}.csv"));
        let cfg = ExperimentConfig {
            m: 6,
            n: 6,
            r: 1,
            p: 70,
            epsilon_grid: vec![0.02],
            tail_mode: TailMode::ExactRank,
            trials: 2,
            base_seed: 5,
            mode,
            delta_method: DeltaMethodChoice::Mc,
            output_path: out.clone(),
        };
        let records = run_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(r.err.is_finite());
            if r.status == "ok" {
                // Both modes compose the bound the same way.
                let composed = r.k0 * r.tail_err + r.k1 * r.epsilon;
                assert!((r.bound - composed).abs() <= 1e-12 * composed.max(1.0));
            }
        }
        std::fs::remove_file(&out).ok();
    }
}

#[test]
fn power_decay_truth_certifies_with_tail_term() {
    let out = tmp("decay.csv");
    let cfg = ExperimentConfig {
        m: 7,
        n: 7,
        r: 2,
        p: 90,
        epsilon_grid: vec![0.05],
        tail_mode: TailMode::PowerDecay(1.2),
        trials: 2,
        base_seed: 8,
        mode: Mode::Corrected,
        delta_method: DeltaMethodChoice::Mc,
        output_path: out.clone(),
    };
    let records = run_experiment(&cfg).unwrap();
    for r in &records {
        assert!(r.tail_err > 1e-3, "compressible truth must have a tail");
        assert!(r.cert_total >= 10, "certificate evaluated");
        if r.status == "ok" {
            assert!(r.bound > r.k1 * r.epsilon, "tail term must contribute");
        }
    }
    std::fs::remove_file(&out).ok();
}

#[test]
fn identity_instance_full_pipeline_exact() {
    // Identity operator, noiseless: solver output equals the truth, and the
    // whole certificate (including the final bound at the certified
    // unrestricted delta = 0) passes.
    let a = nucrec_core::measurement::MeasOp::identity(4, 4);
    let x = random_rank_r_unit(4, 4, 1, &mut stream(62, 0));
    let b = a.apply(&x).unwrap();
    let sol = solve_ellipsoid(&a, &b, 0.0, &SolveOptions::tight()).unwrap();
    assert!(fro_norm(&sol.x_star.sub(&x)) <= 1e-8);

    let est = nucrec_core::rip::delta_full(&a).unwrap();
    assert!(est.delta_hat <= 1e-12);
    let cert = certify(&a, &x, &sol.x_star, &b, 0.0, 1, &est, Mode::Corrected).unwrap();
    assert!(cert.all_pass(), "{:#?}", cert.records);
}
