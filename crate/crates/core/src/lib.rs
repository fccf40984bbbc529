//! Recovery of low-rank matrices from noisy linear measurements by nuclear
//! norm minimization over the ellipsoidal feasible set
//! `{X : ||A X - b||_2 <= eps}`, together with the machinery to check the
//! recovery guarantee on concrete instances: rank-restricted isometry
//! estimation, the guarantee constants K0/K1, and a per-inequality
//! certificate of the whole error-bound derivation.

pub mod acceptance;
pub mod frames;
pub mod guarantee;
pub mod harness;
pub mod io;
pub mod lemmas;
pub mod matops;
pub mod measurement;
pub mod rip;
pub mod rng;
pub mod sampling;
pub mod solver;

pub use frames::{Frame, FrameError, SplitProjectors, TailBlocks};
pub use guarantee::{
    GuaranteeConstants, GuaranteeError, IneqRecord, Lemma37Report, Mode, ProofCertificate,
};
pub use harness::{DeltaMethodChoice, ExperimentConfig, HarnessError, TailMode, TrialRecord};
pub use matops::{Mat, MatError, NormKind, Svd};
pub use measurement::{Field, MeasError, MeasOp, Observation};
pub use rip::{DeltaMethod, RipEstimate, RipError, RopCheck};
pub use solver::{OptimalityReport, SolveError, SolveOptions, SolveResult};
