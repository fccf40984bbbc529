//! Text file formats and CSV emission.
//!
//! Matrix files: first line `m n`, then m lines of n entries separated by
//! single spaces. An entry is `a` or `a+bi` (lowercase i, no spaces inside
//! an entry); negative parts use `-`. Operator files: first line `p m n`,
//! then p rows of m*n entries (the operator matrix acting on column-major
//! vectorized input). Observation files: first line `p epsilon`, then p
//! lines of one entry each.
//!
//! CSV output uses `\n` line endings, `.` decimal separators and 17
//! significant digits for reals, so identical runs produce byte-identical
//! files.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::guarantee::ProofCertificate;
use crate::matops::{Mat, MatError};
use crate::measurement::{MeasError, MeasOp, Observation};
use crate::rip::RipEstimate;
use crate::solver::SolveResult;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Meas(#[from] MeasError),
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.display().to_string(),
        source,
    }
}

/// 17 significant digits, locale-independent.
pub fn fmt_g17(x: f64) -> String {
    format!("{:.16e}", x)
}

// ─── complex entries ────────────────────────────────────────────────────────

/// Canonical entry text: bare real when the imaginary part is zero,
/// `a+bi` / `a-bi` otherwise. Reals print in shortest round-trip form.
pub fn format_entry(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parse `a`, `a+bi`, `a-bi`, or a pure-imaginary `bi`.
pub fn parse_entry(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty entry".into());
    }
    if let Some(body) = s.strip_suffix('i') {
        // Find the split between real and imaginary parts: a sign that is
        // neither leading nor part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for j in (1..bytes.len()).rev() {
            let c = bytes[j] as char;
            if (c == '+' || c == '-') && !matches!(bytes[j - 1] as char, 'e' | 'E') {
                split = Some(j);
                break;
            }
        }
        match split {
            Some(j) => {
                let re: f64 = body[..j]
                    .parse()
                    .map_err(|_| format!("bad real part in '{s}'"))?;
                let im_str = &body[j..];
                let im: f64 = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    _ => im_str
                        .parse()
                        .map_err(|_| format!("bad imaginary part in '{s}'"))?,
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = match body {
                    "" => 1.0,
                    "-" => -1.0,
                    _ => body
                        .parse()
                        .map_err(|_| format!("bad imaginary part in '{s}'"))?,
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s.parse().map_err(|_| format!("bad entry '{s}'"))?;
        Ok(Complex64::new(re, 0.0))
    }
}

// ─── matrix files ───────────────────────────────────────────────────────────

pub fn matrix_to_string(x: &Mat) -> String {
    let mut out = format!("{} {}\n", x.rows(), x.cols());
    for i in 0..x.rows() {
        let row: Vec<String> = (0..x.cols()).map(|j| format_entry(x.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn matrix_from_str(text: &str) -> Result<Mat, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        msg: "missing size header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(IoError::Parse {
            line: 1,
            msg: format!("expected 'm n', got '{header}'"),
        });
    }
    let m: usize = dims[0].parse().map_err(|_| IoError::Parse {
        line: 1,
        msg: format!("bad row count '{}'", dims[0]),
    })?;
    let n: usize = dims[1].parse().map_err(|_| IoError::Parse {
        line: 1,
        msg: format!("bad column count '{}'", dims[1]),
    })?;

    let mut data = Vec::with_capacity(m * n);
    let mut rows_read = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != n {
            return Err(IoError::Parse {
                line: idx + 1,
                msg: format!("expected {n} entries, found {}", entries.len()),
            });
        }
        for e in entries {
            data.push(parse_entry(e).map_err(|msg| IoError::Parse {
                line: idx + 1,
                msg,
            })?);
        }
        rows_read += 1;
        if rows_read == m {
            break;
        }
    }
    if rows_read != m {
        return Err(IoError::Parse {
            line: 0,
            msg: format!("expected {m} rows, found {rows_read}"),
        });
    }
    Ok(Mat::new(m, n, data)?)
}

pub fn write_matrix(path: &Path, x: &Mat) -> Result<(), IoError> {
    fs::write(path, matrix_to_string(x)).map_err(|e| file_err(path, e))
}

pub fn read_matrix(path: &Path) -> Result<Mat, IoError> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    matrix_from_str(&text)
}

// ─── operator files ─────────────────────────────────────────────────────────

pub fn operator_to_string(a: &MeasOp) -> String {
    let op = a.op_matrix();
    let mut out = format!("{} {} {}\n", a.p(), a.m(), a.n());
    for l in 0..a.p() {
        let row: Vec<String> = (0..op.cols()).map(|j| format_entry(op.get(l, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn operator_from_str(text: &str) -> Result<MeasOp, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        msg: "missing size header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(IoError::Parse {
            line: 1,
            msg: format!("expected 'p m n', got '{header}'"),
        });
    }
    let parse_dim = |s: &str| -> Result<usize, IoError> {
        s.parse().map_err(|_| IoError::Parse {
            line: 1,
            msg: format!("bad dimension '{s}'"),
        })
    };
    let p = parse_dim(dims[0])?;
    let m = parse_dim(dims[1])?;
    let n = parse_dim(dims[2])?;

    let mut data = Vec::with_capacity(p * m * n);
    let mut rows_read = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != m * n {
            return Err(IoError::Parse {
                line: idx + 1,
                msg: format!("expected {} entries, found {}", m * n, entries.len()),
            });
        }
        for e in entries {
            data.push(parse_entry(e).map_err(|msg| IoError::Parse {
                line: idx + 1,
                msg,
            })?);
        }
        rows_read += 1;
        if rows_read == p {
            break;
        }
    }
    if rows_read != p {
        return Err(IoError::Parse {
            line: 0,
            msg: format!("expected {p} rows, found {rows_read}"),
        });
    }
    let op = Mat::new(p, m * n, data)?;
    Ok(MeasOp::from_op_matrix(m, n, op)?)
}

pub fn write_operator(path: &Path, a: &MeasOp) -> Result<(), IoError> {
    fs::write(path, operator_to_string(a)).map_err(|e| file_err(path, e))
}

pub fn read_operator(path: &Path) -> Result<MeasOp, IoError> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    operator_from_str(&text)
}

// ─── observation files ──────────────────────────────────────────────────────

/// Observation as stored on disk: the measured vector and the noise bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsFile {
    pub b: Vec<Complex64>,
    pub epsilon: f64,
}

pub fn observation_to_string(obs: &Observation) -> String {
    let mut out = format!("{} {}\n", obs.b.len(), obs.epsilon);
    for z in &obs.b {
        out.push_str(&format_entry(*z));
        out.push('\n');
    }
    out
}

pub fn observation_from_str(text: &str) -> Result<ObsFile, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(IoError::Parse {
            line: 1,
            msg: format!("expected 'p epsilon', got '{header}'"),
        });
    }
    let p: usize = parts[0].parse().map_err(|_| IoError::Parse {
        line: 1,
        msg: format!("bad length '{}'", parts[0]),
    })?;
    let epsilon: f64 = parts[1].parse().map_err(|_| IoError::Parse {
        line: 1,
        msg: format!("bad noise bound '{}'", parts[1]),
    })?;
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(IoError::Parse {
            line: 1,
            msg: format!("noise bound must be finite and nonnegative, got {epsilon}"),
        });
    }
    let mut b = Vec::with_capacity(p);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        b.push(parse_entry(line).map_err(|msg| IoError::Parse {
            line: idx + 1,
            msg,
        })?);
        if b.len() == p {
            break;
        }
    }
    if b.len() != p {
        return Err(IoError::Parse {
            line: 0,
            msg: format!("expected {p} entries, found {}", b.len()),
        });
    }
    Ok(ObsFile { b, epsilon })
}

pub fn write_observation(path: &Path, obs: &Observation) -> Result<(), IoError> {
    fs::write(path, observation_to_string(obs)).map_err(|e| file_err(path, e))
}

pub fn read_observation(path: &Path) -> Result<ObsFile, IoError> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    observation_from_str(&text)
}

// ─── CSV emission ───────────────────────────────────────────────────────────

/// One-row CSV for a restricted-isometry estimate.
pub fn rip_estimate_csv(est: &RipEstimate, seed: u64) -> String {
    format!(
        "r,method,delta_hat,certified_upper,budget,seed\n{},{},{},{},{},{}\n",
        est.r,
        est.method.label(),
        fmt_g17(est.delta_hat),
        est.certified_upper,
        est.samples_or_restarts,
        seed
    )
}

/// One-row CSV of the scalar outcome of a solve.
pub fn solve_result_csv(res: &SolveResult) -> String {
    format!(
        "residual,nuclear,iterations,lambda_final,converged,subopt_witness\n{},{},{},{},{},{}\n",
        fmt_g17(res.residual),
        fmt_g17(res.nuclear),
        res.iterations,
        fmt_g17(res.lambda_final),
        res.converged,
        fmt_g17(res.subopt_witness)
    )
}

/// Certificate CSV: one row per inequality record.
pub fn certificate_csv(cert: &ProofCertificate) -> String {
    let mut out = String::from("label,lhs,rhs,slack,pass,flag\n");
    for r in &cert.records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.label,
            fmt_g17(r.lhs),
            fmt_g17(r.rhs),
            fmt_g17(r.slack),
            r.pass,
            r.flag
        ));
    }
    out
}
