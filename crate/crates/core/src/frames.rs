//! Finite matrix frames and the projection machinery of the recovery
//! analysis.
//!
//! A frame is an ordered set of same-shape matrices. Synthesis maps a
//! coefficient vector to `sum_k alpha_k psi_k`; analysis is its adjoint
//! `k |-> <X, psi_k>`. On top of that sit the two structured decompositions
//! used by the error-bound certificate: the four-way split of matrix space
//! by the top-r singular subspaces of a reference matrix, and the partition
//! of a matrix into consecutive rank-r singular blocks.

use num_complex::Complex64;
use thiserror::Error;

use crate::matops::{self, inner, Mat, Svd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("frame must be nonempty")]
    Empty,
    #[error("atom {index} has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    AtomShape {
        index: usize,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("coefficient vector length {got} does not match atom count {want}")]
    CoeffLength { got: usize, want: usize },
    #[error("matrix shape {rows}x{cols} does not match frame shape {want_rows}x{want_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("frame is not verified orthonormal")]
    NotOrthonormal,
    #[error("atoms {a} and {b} violate orthonormality: |<psi_a, psi_b> - delta_ab| = {dev:.3e}")]
    OrthonormalityViolation { a: usize, b: usize, dev: f64 },
    #[error("rank {r} out of range for split of a {rows}x{cols} matrix")]
    RankOutOfRange { r: usize, rows: usize, cols: usize },
    #[error(transparent)]
    Mat(#[from] matops::MatError),
}

/// Tolerance for verifying pairwise orthonormality of frame atoms.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Ordered set of same-shape matrices.
#[derive(Debug, Clone)]
pub struct Frame {
    atoms: Vec<Mat>,
    orthonormal: bool,
}

impl Frame {
    /// Shape-checked constructor; the orthonormal flag starts unset.
    pub fn new(atoms: Vec<Mat>) -> Result<Self, FrameError> {
        let first = atoms.first().ok_or(FrameError::Empty)?;
        let (m, n) = (first.rows(), first.cols());
        for (k, a) in atoms.iter().enumerate() {
            if a.rows() != m || a.cols() != n {
                return Err(FrameError::AtomShape {
                    index: k,
                    rows: a.rows(),
                    cols: a.cols(),
                    want_rows: m,
                    want_cols: n,
                });
            }
        }
        Ok(Self {
            atoms,
            orthonormal: false,
        })
    }

    /// Verify `<psi_j, psi_k> = delta_jk` within [`ORTHONORMAL_TOL`] and set
    /// the flag. Fails naming the first offending pair.
    pub fn verify_orthonormal(&mut self) -> Result<(), FrameError> {
        for a in 0..self.atoms.len() {
            for b in a..self.atoms.len() {
                let ip = inner(&self.atoms[a], &self.atoms[b])?;
                let want = if a == b { 1.0 } else { 0.0 };
                let dev = (ip - Complex64::new(want, 0.0)).norm();
                if dev > ORTHONORMAL_TOL {
                    return Err(FrameError::OrthonormalityViolation { a, b, dev });
                }
            }
        }
        self.orthonormal = true;
        Ok(())
    }

    /// Constructor that verifies orthonormality up front.
    pub fn orthonormal(atoms: Vec<Mat>) -> Result<Self, FrameError> {
        let mut f = Self::new(atoms)?;
        f.verify_orthonormal()?;
        Ok(f)
    }

    pub fn atoms(&self) -> &[Mat] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty frames
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.atoms[0].rows(), self.atoms[0].cols())
    }
}

/// Synthesis `sum_k coeffs[k] psi_k`.
pub fn synthesize(psi: &Frame, coeffs: &[Complex64]) -> Result<Mat, FrameError> {
    if coeffs.len() != psi.len() {
        return Err(FrameError::CoeffLength {
            got: coeffs.len(),
            want: psi.len(),
        });
    }
    let (m, n) = psi.shape();
    let mut out = Mat::zeros(m, n);
    for (c, atom) in coeffs.iter().zip(psi.atoms()) {
        if *c == Complex64::ZERO {
            continue;
        }
        out = out.add(&atom.scale(*c));
    }
    Ok(out)
}

/// Analysis (the adjoint of synthesis): component k is `<X, psi_k>`.
pub fn analyze(psi: &Frame, x: &Mat) -> Result<Vec<Complex64>, FrameError> {
    let (m, n) = psi.shape();
    if x.rows() != m || x.cols() != n {
        return Err(FrameError::ShapeMismatch {
            rows: x.rows(),
            cols: x.cols(),
            want_rows: m,
            want_cols: n,
        });
    }
    psi.atoms()
        .iter()
        .map(|a| inner(x, a).map_err(FrameError::from))
        .collect()
}

/// Orthogonal projection onto the span of a verified-orthonormal frame:
/// `sum_k <X, psi_k> psi_k`.
pub fn project(psi: &Frame, x: &Mat) -> Result<Mat, FrameError> {
    if !psi.is_orthonormal() {
        return Err(FrameError::NotOrthonormal);
    }
    let coeffs = analyze(psi, x)?;
    synthesize(psi, &coeffs)
}

// ─── four-way split by the top-r singular subspaces ─────────────────────────

/// The four mutually orthogonal projections determined by a reference SVD
/// and a rank cut r: with Pu / Pv the projectors onto the top-r left / right
/// singular subspaces,
///
/// ```text
/// P1 Z = Pu Z Pv          P2 Z = (I - Pu) Z Pv
/// P3 Z = Pu Z (I - Pv)    P4 Z = (I - Pu) Z (I - Pv)
/// ```
///
/// They sum to the identity, and `P1 X = best_rank_r(X, r)` for the source
/// matrix X itself.
#[derive(Debug, Clone)]
pub struct SplitProjectors {
    u_r: Mat,
    v_r: Mat,
    r: usize,
}

impl SplitProjectors {
    /// Requires `r < min(m, n)`; at `r = min(m, n)` the split is degenerate
    /// (P2-P4 vanish identically) and is rejected.
    pub fn new(source: &Svd, r: usize) -> Result<Self, FrameError> {
        let m = source.left.rows();
        let n = source.right.rows();
        if r < 1 || r >= m.min(n) {
            return Err(FrameError::RankOutOfRange { r, rows: m, cols: n });
        }
        Ok(Self {
            u_r: source.left.first_cols(r),
            v_r: source.right.first_cols(r),
            r,
        })
    }

    pub fn rank_cut(&self) -> usize {
        self.r
    }

    /// Apply all four projections to Z; the results sum to Z.
    pub fn split(&self, z: &Mat) -> Result<[Mat; 4], FrameError> {
        let (m, n) = (self.u_r.rows(), self.v_r.rows());
        if z.rows() != m || z.cols() != n {
            return Err(FrameError::ShapeMismatch {
                rows: z.rows(),
                cols: z.cols(),
                want_rows: m,
                want_cols: n,
            });
        }
        // Row-space and column-space components: A = Pu Z, B = Z Pv.
        let uh_z = self.u_r.h().matmul(z); // r x n
        let pu_z = self.u_r.matmul(&uh_z); // Pu Z
        let z_vv = z.matmul(&self.v_r).matmul(&self.v_r.h()); // Z Pv
        let pu_z_vv = self.u_r.matmul(&uh_z.matmul(&self.v_r)).matmul(&self.v_r.h());

        let p1 = pu_z_vv.clone();
        let p2 = z_vv.sub(&pu_z_vv);
        let p3 = pu_z.sub(&pu_z_vv);
        let p4 = z.sub(&pu_z).sub(&z_vv).add(&pu_z_vv);
        Ok([p1, p2, p3, p4])
    }
}

/// Convenience wrapper: split Z by the top-r singular subspaces of `xsvd`.
pub fn split4(xsvd: &Svd, r: usize, z: &Mat) -> Result<[Mat; 4], FrameError> {
    SplitProjectors::new(xsvd, r)?.split(z)
}

// ─── rank-r tail blocks ─────────────────────────────────────────────────────

/// Partition of a matrix into consecutive rank-<=r singular blocks: block k
/// carries singular triplets (k-1)r+1 .. kr in nonincreasing sigma order.
/// Blocks sum to the source matrix; a numerically zero matrix has no blocks.
#[derive(Debug, Clone)]
pub struct TailBlocks {
    pub blocks: Vec<Mat>,
    pub r: usize,
    /// Singular values per block, same order as `blocks`.
    block_sigmas: Vec<Vec<f64>>,
}

impl TailBlocks {
    pub fn count(&self) -> usize {
        self.blocks.len()
    }

    /// Nuclear norm of block k (sum of its singular values).
    pub fn block_nuclear(&self, k: usize) -> f64 {
        self.block_sigmas[k].iter().sum()
    }

    /// Frobenius norm of block k.
    pub fn block_fro(&self, k: usize) -> f64 {
        self.block_sigmas[k]
            .iter()
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt()
    }

    /// Spectral norm of block k (its leading singular value).
    pub fn block_spectral(&self, k: usize) -> f64 {
        self.block_sigmas[k].first().copied().unwrap_or(0.0)
    }
}

/// Decompose T into rank-r singular blocks.
pub fn tail_blocks(t: &Mat, r: usize) -> Result<TailBlocks, FrameError> {
    assert!(r >= 1, "block width must be positive");
    let f = svd(t)?;
    let nnz = f.rank();
    let mut blocks = Vec::new();
    let mut block_sigmas = Vec::new();
    let mut start = 0usize;
    while start < nnz {
        let stop = (start + r).min(nnz);
        let mut b = Mat::zeros(t.rows(), t.cols());
        let mut sig = Vec::with_capacity(stop - start);
        for j in start..stop {
            let s = f.sigmas[j];
            sig.push(s);
            b = b.add(&f.frame_atom(j).scale_re(s));
        }
        blocks.push(b);
        block_sigmas.push(sig);
        start = stop;
    }
    Ok(TailBlocks {
        blocks,
        r,
        block_sigmas,
    })
}

use crate::matops::svd;
