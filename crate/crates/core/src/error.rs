use thiserror::Error;

use crate::lattice::LatticeSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice truncation radius must be at least 1")]
    EmptyLattice,

    #[error("lattice mismatch: {left:?} vs {right:?}")]
    LatticeMismatch { left: LatticeSpec, right: LatticeSpec },

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("Leray projector is undefined at k = 0")]
    ZeroWaveVector,

    #[error("negative heat-flow time {0}")]
    NegativeTime(f64),

    #[error("time {0} is not a point of the substep grid")]
    OffGrid(f64),

    #[error("identity split needs a1 + a2 > 0 (got a1 = {a1}, a2 = {a2})")]
    DegenerateWeights { a1: f64, a2: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last update norm {last_update:e}, last contraction ratio {last_ratio:?})"
    )]
    NonConvergence { iterations: usize, last_update: f64, last_ratio: Option<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
