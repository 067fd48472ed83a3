//! Fitted constants for the decay bounds of the induction.
//!
//! Every fitter returns the *minimal* constant for which a bound of the given
//! shape holds on the measured data. Bounded, stable fitted constants across
//! induction steps are the numerical evidence that the inductive hypothesis
//! propagates. Suprema over sites are taken in log space, so large Gaussian
//! weights at late steps never overflow against tiny amplitudes.

use crate::field::{fmc_norm, phi_norm, SpectralField};
use crate::operators::TimeSlicedField;
use crate::params::SolverParams;

/// Minimum number of supported modes for a decay-rate regression.
pub const MIN_FIT_MODES: usize = 4;

/// One step's worth of fitted constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRecord {
    /// Integer time reached by the step (index j of the new h and g entries).
    pub m: u64,
    /// Minimal D in |hⱼ(k)| ≤ Dδ² e^{−(j/2)|k|²}/|k|^{2ε}.
    pub d_h: f64,
    /// Minimal D in |gⱼ(k)| ≤ Dδ² e^{−d√j|k|}/|k|^β at d = decay_c.
    pub d_g: f64,
    /// Least-squares decay rate d of gⱼ; `None` when too few modes.
    pub d_g_rate: Option<f64>,
    /// Minimal D of the H⁽¹⁾ envelope over the interval.
    pub d_h1: f64,
    /// ‖I1‖ in 𝓕_{m+1}(c), max over slices.
    pub c1: f64,
    /// Measured gain of the linear term; `None` when no iterate had ‖g‖ > 0.
    pub c2: Option<f64>,
    /// Measured constant of the quadratic term; `None` when ‖g‖ = 0.
    pub c3: Option<f64>,
    /// Whether c2 + 2·c3·‖g‖ < 1.
    pub contracting: bool,
    pub fp_iterations: usize,
    /// sup_t ‖v(t)‖_α over the interval.
    pub phi_envelope: f64,
}

/// Per-j minimal constants of the h-bound, with their running maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct HBoundFit {
    pub per_j: Vec<f64>,
    pub running_max: Vec<f64>,
}

/// Minimal constant of the h-bound for one history entry `j` (1-based).
pub fn h_bound_constant(h: &SpectralField, j: u64, params: &SolverParams) -> f64 {
    let log_delta2 = 2.0 * params.delta.ln();
    h.support()
        .map(|(k, v)| {
            let kappa = k.norm_sq() as f64;
            let log = v.norm().ln() + params.epsilon * kappa.ln() + 0.5 * j as f64 * kappa - log_delta2;
            log.exp()
        })
        .fold(0.0, f64::max)
}

/// Fits the h-bound for every entry of a history (entry `i` is j = i + 1).
pub fn fit_h_bound(h1_history: &[SpectralField], params: &SolverParams) -> HBoundFit {
    let per_j: Vec<f64> =
        h1_history.iter().enumerate().map(|(i, h)| h_bound_constant(h, i as u64 + 1, params)).collect();
    let running_max = running_max(&per_j);
    HBoundFit { per_j, running_max }
}

fn running_max(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(0.0f64, |acc, &x| {
            *acc = acc.max(x);
            Some(*acc)
        })
        .collect()
}

/// Least-squares line `ln(|g(k)||k|^β) ≈ intercept − rate·|k|√j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GBoundFit {
    /// Minimal D at d = decay_c.
    pub constant: f64,
    /// `None` when fewer than [`MIN_FIT_MODES`] modes are supported or all
    /// supported modes share one |k|.
    pub decay: Option<DecayFit>,
}

pub fn g_bound_fit(g: &SpectralField, j: u64, params: &SolverParams) -> GBoundFit {
    let constant = fmc_norm(g, j, params.decay_c, params.beta) / (params.delta * params.delta);
    GBoundFit { constant, decay: fit_decay_rate(g, j, params.beta) }
}

/// Fits the g-bound for every entry of a history (entry `i` is j = i + 1).
pub fn fit_g_bound(g_history: &[SpectralField], params: &SolverParams) -> Vec<GBoundFit> {
    g_history.iter().enumerate().map(|(i, g)| g_bound_fit(g, i as u64 + 1, params)).collect()
}

pub fn fit_decay_rate(g: &SpectralField, j: u64, beta: f64) -> Option<DecayFit> {
    let sqrt_j = (j as f64).sqrt();
    let points: Vec<(f64, f64)> = g
        .support()
        .map(|(k, v)| {
            let kn = k.norm();
            (kn * sqrt_j, v.norm().ln() + beta * kn.ln())
        })
        .collect();
    if points.len() < MIN_FIT_MODES {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(DecayFit { rate: -slope, intercept: my - slope * mx, modes: points.len() })
}

/// Minimal D with
/// |H⁽¹⁾(t,k)| ≤ Dδ²|k|^{−2ε} (1 − e^{−(t/2)|k|²})/|k|² · e^{−(m+1)|k|²/2}
/// over all grid times t > 0 of the interval starting at integer time `m`.
/// The t = 0 slice is excluded: its envelope factor vanishes while H⁽¹⁾(0)
/// still carries the history terms.
pub fn check_h1_envelope(h1: &TimeSlicedField, m: u64, params: &SolverParams) -> f64 {
    let grid = h1.grid();
    let log_delta2 = 2.0 * params.delta.ln();
    let mut best = 0.0f64;
    for i in 1..grid.len() {
        let t = grid.time(i);
        for (k, v) in h1.slice(i).support() {
            let kappa = k.norm_sq() as f64;
            let log_env = log_delta2 - params.epsilon * kappa.ln() + (-(-0.5 * t * kappa).exp_m1()).ln()
                - kappa.ln()
                - 0.5 * (m + 1) as f64 * kappa;
            best = best.max((v.norm().ln() - log_env).exp());
        }
    }
    best
}

/// Norms observed at one fixed-point iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateNorms {
    pub g_norm: f64,
    pub i2_norm: f64,
    pub i3_norm: f64,
}

/// Everything the contraction fit needs from a fixed-point solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContractionSamples {
    pub i1_norm: f64,
    pub iterates: Vec<IterateNorms>,
    /// Norm of the converged solution.
    pub g_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCoefficients {
    pub c1: f64,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub contracting: bool,
}

/// c1 = ‖I1‖, c2 = max ‖I2(g)‖/‖g‖, c3 = max ‖I3(g)‖/‖g‖² over iterates with
/// ‖g‖ > 0; reports whether c2 + 2·c3·‖g‖ < 1.
pub fn contraction_coefficients(samples: &ContractionSamples) -> ContractionCoefficients {
    let measured: Vec<&IterateNorms> = samples.iterates.iter().filter(|s| s.g_norm > 0.0).collect();
    let c2 = (!measured.is_empty()).then(|| measured.iter().map(|s| s.i2_norm / s.g_norm).fold(0.0, f64::max));
    let c3 =
        (!measured.is_empty()).then(|| measured.iter().map(|s| s.i3_norm / (s.g_norm * s.g_norm)).fold(0.0, f64::max));
    let contracting = c2.unwrap_or(0.0) + 2.0 * c3.unwrap_or(0.0) * samples.g_norm < 1.0;
    ContractionCoefficients { c1: samples.i1_norm, c2, c3, contracting }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiEnvelope {
    pub series: Vec<(f64, f64)>,
    pub sup: f64,
    /// Set when some sample exceeds 2δ.
    pub exceeds_two_delta: bool,
}

/// Φ(α) norm time series of `(t, v(t))` samples.
pub fn phi_envelope<'a, I>(samples: I, params: &SolverParams) -> PhiEnvelope
where
    I: IntoIterator<Item = (f64, &'a SpectralField)>,
{
    let series: Vec<(f64, f64)> = samples.into_iter().map(|(t, v)| (t, phi_norm(v, params.alpha))).collect();
    let sup = series.iter().map(|s| s.1).fold(0.0, f64::max);
    PhiEnvelope { series, sup, exceeds_two_delta: sup > 2.0 * params.delta }
}
