//! Direct Picard iteration of the mild equation over a whole horizon, with no
//! decomposition. Shares lattice and quadrature with the induction solver so
//! that the two agree up to fixed-point tolerances.

use crate::error::{Error, Result};
use crate::field::{heat_multiply, phi_norm, SpectralField};
use crate::operators::{bilinear, duhamel_all, TimeGrid, TimeSlicedField};
use crate::params::SolverParams;

#[derive(Debug, Clone)]
pub struct PicardTrajectory {
    pub slices: TimeSlicedField,
    pub iterations_used: usize,
    pub final_update_norm: f64,
    /// Sup-over-slices Φ(α) distance between consecutive iterates.
    pub update_norms: Vec<f64>,
}

impl PicardTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        self.slices.grid()
    }

    /// Solution at grid time `t`.
    pub fn at(&self, t: f64) -> Result<&SpectralField> {
        self.slices.at(t)
    }
}

/// Picard iteration v⁽ⁿ⁺¹⁾(t) = e^{−t|k|²}v₀ + ∫₀ᵗ e^{−(t−s)|k|²} B(v⁽ⁿ⁾(s), v⁽ⁿ⁾(s)) ds
/// from v⁽⁰⁾ = 0, until the sup-over-slices Φ(α) change drops below `fp_tol`.
/// `horizon` must be a positive multiple of the substep width.
pub fn picard_solve(v0: &SpectralField, horizon: f64, params: &SolverParams) -> Result<PicardTrajectory> {
    let scaled = horizon * params.substeps as f64;
    let intervals = scaled.round();
    if !(horizon > 0.0) || (scaled - intervals).abs() > 1e-9 * scaled.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} is not a positive multiple of 1/{}",
            params.substeps
        )));
    }
    let grid = TimeGrid::with_intervals(params.substeps, intervals as usize);
    let free = TimeSlicedField::from_fn(grid, |i| heat_multiply(v0, grid.time(i)).expect("t >= 0"))?;

    let mut current = TimeSlicedField::zeros(grid, v0.lattice());
    let mut update_norms = Vec::new();
    for iteration in 1..=params.fp_max_iter {
        let source = current.map_slices(|v| bilinear(v, v).expect("shared lattice"));
        let next = free.add(&duhamel_all(&source))?;
        let diff = next.sub(&current)?;
        let update = diff.max_over_slices(|f| phi_norm(f, params.alpha));
        if !next.is_finite() || !update.is_finite() {
            return Err(Error::NonConvergence {
                iterations: iteration,
                last_update: update,
                last_ratio: ratio_of_last(&update_norms),
            });
        }
        update_norms.push(update);
        current = next;
        if update < params.fp_tol {
            return Ok(PicardTrajectory {
                slices: current,
                iterations_used: iteration,
                final_update_norm: update,
                update_norms,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: params.fp_max_iter,
        last_update: update_norms.last().copied().unwrap_or(f64::NAN),
        last_ratio: ratio_of_last(&update_norms),
    })
}

fn ratio_of_last(norms: &[f64]) -> Option<f64> {
    match norms {
        [.., a, b] if *a > 0.0 => Some(b / a),
        _ => None,
    }
}
