//! Command-line interface for the low-rank recovery toolkit.
//!
//! Subcommands:
//!   recover       solve the ellipsoidal problem for an operator/observation
//!   rip           estimate the rank-restricted isometry constant
//!   verify-bound  run a Monte Carlo experiment against the error bound
//!   certify       evaluate the inequality chain on one instance
//!   lemmas        run the norm-identity property batteries
//!   selftest      run the full acceptance battery
//!
//! Exit codes: 0 success, 1 failed check, 2 usage error.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use nucrec_core::acceptance;
use nucrec_core::guarantee::{certify, Mode};
use nucrec_core::harness::{run_experiment, ExperimentConfig};
use nucrec_core::io::{
    self, certificate_csv, read_matrix, read_observation, read_operator, rip_estimate_csv,
    solve_result_csv, write_matrix,
};
use nucrec_core::lemmas;
use nucrec_core::rip::{
    delta_full, delta_local, delta_mc, DEFAULT_MAX_ITERS, DEFAULT_MC_SAMPLES, DEFAULT_RESTARTS,
};
use nucrec_core::solver::{solve_ellipsoid, SolveOptions};

const USAGE: &str = "\
nucrec — low-rank matrix recovery by nuclear norm minimization

USAGE:
  nucrec <SUBCOMMAND> [FLAGS]

SUBCOMMANDS:
  recover --op PATH --obs PATH --out PATH [--csv PATH]
      Solve min ||X||_* s.t. ||A X - b|| <= eps for the operator file and
      observation file; write the solution matrix to --out and, optionally,
      a one-row result CSV to --csv (the row is always printed).

  rip --op PATH --r N [--method mc|local|full] [--seed N]
      [--samples N] [--restarts N] [--iters N]
      Estimate the rank-restricted isometry constant at level r and print
      it as a CSV row `r,method,delta_hat,certified_upper,budget,seed`.

  verify-bound --config PATH [--seed N] [--trials N] [--out PATH]
      [--mode paper|corrected]
      Run the Monte Carlo experiment described by the config file, write the
      per-trial CSV, and check the error bound on every qualifying row.

  certify --op PATH --x PATH --xstar PATH --obs PATH --r N --out PATH
      [--mode paper|corrected] [--method mc|local|full] [--seed N]
      Evaluate the inequality chain on one instance and write the
      certificate CSV.

  lemmas [--cases N] [--seed N]
      Run the norm-identity property batteries and print a summary,
      including the scalar-maximization erratum report.

  selftest
      Run the full acceptance battery (slow).

CONFIG FILE (verify-bound): `key = value` lines, `#` comments. Keys: m, n,
r, p, epsilon_grid (comma separated), tail_mode (exact_rank or
power_decay(rate)), trials, base_seed, mode (paper|corrected),
delta_method (mc|local|full), output_path.

EXIT CODES: 0 success, 1 failed check, 2 usage error.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!();
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
    }
}

/// Flag map for one subcommand; every flag takes a value.
fn parse_flags(args: &[String]) -> Result<HashMap<String, String>, String> {
    let mut map = HashMap::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| format!("unexpected argument '{arg}'"))?;
        let value = it
            .next()
            .ok_or_else(|| format!("missing value for --{key}"))?;
        if map.insert(key.to_string(), value.clone()).is_some() {
            return Err(format!("duplicate flag --{key}"));
        }
    }
    Ok(map)
}

fn required<'a>(flags: &'a HashMap<String, String>, key: &str) -> Result<&'a str, String> {
    flags
        .get(key)
        .map(|s| s.as_str())
        .ok_or_else(|| format!("missing required flag --{key}"))
}

fn parse_num<T: std::str::FromStr>(
    flags: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, String> {
    match flags.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| format!("bad value for --{key}: '{v}'")),
    }
}

fn parse_mode(flags: &HashMap<String, String>) -> Result<Mode, String> {
    match flags.get("mode").map(|s| s.as_str()) {
        None | Some("corrected") => Ok(Mode::Corrected),
        Some("paper") => Ok(Mode::Paper),
        Some(other) => Err(format!("bad value for --mode: '{other}'")),
    }
}

fn known_flags(flags: &HashMap<String, String>, allowed: &[&str]) -> Result<(), String> {
    for key in flags.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format!("unknown flag --{key}"));
        }
    }
    Ok(())
}

fn run(args: &[String]) -> Result<ExitCode, String> {
    let Some(sub) = args.first() else {
        return Err("missing subcommand".into());
    };
    match sub.as_str() {
        "recover" => cmd_recover(&args[1..]),
        "rip" => cmd_rip(&args[1..]),
        "verify-bound" => cmd_verify_bound(&args[1..]),
        "certify" => cmd_certify(&args[1..]),
        "lemmas" => cmd_lemmas(&args[1..]),
        "selftest" => cmd_selftest(&args[1..]),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown subcommand '{other}'")),
    }
}

fn cmd_recover(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    known_flags(&flags, &["op", "obs", "out", "csv"])?;
    let op_path = required(&flags, "op")?;
    let obs_path = required(&flags, "obs")?;
    let out_path = required(&flags, "out")?;

    let a = read_operator(Path::new(op_path)).map_err(|e| e.to_string())?;
    let obs = read_observation(Path::new(obs_path)).map_err(|e| e.to_string())?;

    // Noiseless observations get a near-exact solve so downstream
    // certificates are meaningful at their absolute slack.
    let opts = if obs.epsilon == 0.0 {
        SolveOptions::tight()
    } else {
        SolveOptions::default()
    };
    match solve_ellipsoid(&a, &obs.b, obs.epsilon, &opts) {
        Ok(res) => {
            write_matrix(Path::new(out_path), &res.x_star).map_err(|e| e.to_string())?;
            let csv = solve_result_csv(&res);
            print!("{csv}");
            if let Some(csv_path) = flags.get("csv") {
                std::fs::write(csv_path, csv).map_err(|e| format!("{csv_path}: {e}"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("solve failed: {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_rip(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    known_flags(&flags, &["op", "r", "method", "seed", "samples", "restarts", "iters"])?;
    let op_path = required(&flags, "op")?;
    let r: usize = required(&flags, "r")?
        .parse()
        .map_err(|_| "bad value for --r".to_string())?;
    let seed: u64 = parse_num(&flags, "seed", 0)?;

    let a = read_operator(Path::new(op_path)).map_err(|e| e.to_string())?;
    let est = match flags.get("method").map(|s| s.as_str()).unwrap_or("local") {
        "mc" => {
            let samples = parse_num(&flags, "samples", DEFAULT_MC_SAMPLES)?;
            delta_mc(&a, r, samples, seed).map_err(|e| e.to_string())?
        }
        "local" => {
            let restarts = parse_num(&flags, "restarts", DEFAULT_RESTARTS)?;
            let iters = parse_num(&flags, "iters", DEFAULT_MAX_ITERS)?;
            delta_local(&a, r, restarts, iters, seed).map_err(|e| e.to_string())?
        }
        "full" => delta_full(&a).map_err(|e| e.to_string())?,
        other => return Err(format!("bad value for --method: '{other}'")),
    };
    print!("{}", rip_estimate_csv(&est, seed));
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_bound(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    known_flags(&flags, &["config", "seed", "trials", "out", "mode"])?;
    let config_path = required(&flags, "config")?;
    let mut cfg =
        ExperimentConfig::from_file(Path::new(config_path)).map_err(|e| e.to_string())?;
    if let Some(seed) = flags.get("seed") {
        cfg.base_seed = seed.parse().map_err(|_| "bad value for --seed".to_string())?;
    }
    if let Some(trials) = flags.get("trials") {
        cfg.trials = trials.parse().map_err(|_| "bad value for --trials".to_string())?;
    }
    if let Some(out) = flags.get("out") {
        cfg.output_path = PathBuf::from(out);
    }
    if flags.contains_key("mode") {
        cfg.mode = parse_mode(&flags)?;
    }
    cfg.validate().map_err(|e| e.to_string())?;

    let records = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("experiment failed: {e}");
            return Ok(ExitCode::from(1));
        }
    };

    let mut qualifying = 0usize;
    let mut violations = 0usize;
    let mut above = 0usize;
    let mut errors = 0usize;
    for rec in &records {
        if rec.status.starts_with("solver_error") {
            errors += 1;
        } else if rec.status == "delta_above_threshold" {
            above += 1;
        } else {
            qualifying += 1;
            if !(rec.err <= rec.bound + 1e-9 * rec.bound.max(1.0)) {
                violations += 1;
            }
        }
    }
    println!(
        "verify-bound: {} rows -> {} ({} qualifying, {} bound violations, {} above threshold, {} solver errors)",
        records.len(),
        cfg.output_path.display(),
        qualifying,
        violations,
        above,
        errors
    );
    Ok(if violations == 0 && errors == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_certify(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    known_flags(&flags, &["op", "x", "xstar", "obs", "r", "out", "mode", "method", "seed"])?;
    let a = read_operator(Path::new(required(&flags, "op")?)).map_err(|e| e.to_string())?;
    let x = read_matrix(Path::new(required(&flags, "x")?)).map_err(|e| e.to_string())?;
    let x_star = read_matrix(Path::new(required(&flags, "xstar")?)).map_err(|e| e.to_string())?;
    let obs = read_observation(Path::new(required(&flags, "obs")?)).map_err(|e| e.to_string())?;
    let r: usize = required(&flags, "r")?
        .parse()
        .map_err(|_| "bad value for --r".to_string())?;
    let out_path = required(&flags, "out")?;
    let mode = parse_mode(&flags)?;
    let seed: u64 = parse_num(&flags, "seed", 0)?;

    let level = 3 * r;
    let est = match flags.get("method").map(|s| s.as_str()).unwrap_or("local") {
        "mc" => delta_mc(&a, level, DEFAULT_MC_SAMPLES, seed).map_err(|e| e.to_string())?,
        "local" => delta_local(&a, level, DEFAULT_RESTARTS, DEFAULT_MAX_ITERS, seed)
            .map_err(|e| e.to_string())?,
        "full" => delta_full(&a).map_err(|e| e.to_string())?,
        other => return Err(format!("bad value for --method: '{other}'")),
    };

    let cert = certify(&a, &x, &x_star, &obs.b, obs.epsilon, r, &est, mode)
        .map_err(|e| e.to_string())?;
    std::fs::write(out_path, certificate_csv(&cert)).map_err(|e| format!("{out_path}: {e}"))?;
    println!(
        "certify: {}/{} inequalities pass at delta_hat = {} ({}) -> {}",
        cert.pass_count(),
        cert.total(),
        io::fmt_g17(cert.delta_used),
        cert.delta_method,
        out_path
    );
    Ok(if cert.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_lemmas(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    known_flags(&flags, &["cases", "seed"])?;
    let cases: usize = parse_num(&flags, "cases", 1000)?;
    let seed: u64 = parse_num(&flags, "seed", 7)?;

    let reports = lemmas::run_all(cases, seed);
    let mut all_pass = true;
    for rep in &reports {
        println!("{}", rep.summary());
        all_pass &= rep.pass();
    }
    println!("scalar max on the unit circle, published vs numeric:");
    for (alpha, rep) in lemmas::scalar_max_reports() {
        let marker = if rep.numeric_max > rep.paper_value + 1e-9 {
            "  <- numeric max exceeds the published value"
        } else {
            ""
        };
        println!(
            "  alpha = {:.6}: published {:.9}, numeric {:.9} at ({:.6}, {:.6}){}",
            alpha,
            rep.paper_value,
            rep.numeric_max,
            rep.numeric_argmax.0,
            rep.numeric_argmax.1,
            marker
        );
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_selftest(args: &[String]) -> Result<ExitCode, String> {
    if !args.is_empty() {
        return Err(format!("unexpected argument '{}'", args[0]));
    }
    let results = acceptance::run_all();
    let mut all_pass = true;
    for r in &results {
        println!("{}", r.line());
        all_pass &= r.pass;
    }
    println!(
        "selftest: {}/{} criteria pass",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    );
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
