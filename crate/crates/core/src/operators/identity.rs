use crate::error::{Error, Result};
use crate::lattice::WaveVector;

/// Completing the square in `l`:
/// a1|k−l|² + a2|l|² = a1a2/(a1+a2)·|k|² + (a1+a2)·|l − a1/(a1+a2)·k|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySplit {
    /// a1a2/(a1+a2)
    pub coeff_k: f64,
    /// a1/(a1+a2)
    pub shift_coeff: f64,
    /// (a1+a2)|l − shift_coeff·k|²
    pub residual: f64,
}

pub fn identity_split(a1: f64, a2: f64, k: &WaveVector, l: &WaveVector) -> Result<IdentitySplit> {
    let total = a1 + a2;
    if !(a1 >= 0.0 && a2 >= 0.0 && total > 0.0) {
        return Err(Error::DegenerateWeights { a1, a2 });
    }
    let shift_coeff = a1 / total;
    let kc = k.components();
    let lc = l.components();
    let shifted: f64 = (0..3).map(|i| (lc[i] - shift_coeff * kc[i]).powi(2)).sum();
    Ok(IdentitySplit { coeff_k: a1 * a2 / total, shift_coeff, residual: total * shifted })
}
