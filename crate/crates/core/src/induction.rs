//! Unit-interval induction.
//!
//! At integer time m the solution is stored as
//!
//! ```text
//! v(m, k) = e^{−m|k|²} v₀(k) + Σⱼ e^{−(m−j)|k|²} (hⱼ(k)/|k|^{2ε} + gⱼ(k)),   j = 1..m
//! ```
//!
//! and one call to [`advance_unit_interval`] produces h_{m+1} and g_{m+1} on
//! [m, m+1]. With W = H⁽⁰⁾ + H⁽¹⁾ + G + g, the mild equation on the interval
//! reduces to the fixed-point problem
//!
//! ```text
//! g = I1 + I2(g) + I3(g),  I1 = W₀⊛W₀ − H⁽⁰⁾⊛H⁽⁰⁾,  I2(g) = W₀⊛g + g⊛W₀,  I3(g) = g⊛g
//! ```
//!
//! where W₀ = H⁽⁰⁾ + H⁽¹⁾ + G. The history entries are frozen at their t = 1
//! values once their interval is complete.

use crate::certificates::{
    check_h1_envelope, contraction_coefficients, g_bound_fit, h_bound_constant, phi_envelope, CertificateRecord,
    ContractionSamples, IterateNorms,
};
use crate::error::{Error, Result};
use crate::field::{fmc_norm, heat_factor, heat_multiply, SpectralField};
use crate::operators::{star_product, TimeGrid, TimeSlicedField};
use crate::params::SolverParams;

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionState {
    m: u64,
    /// Initial velocity v₀ = c₀/|k|^α.
    c0_field: SpectralField,
    /// hⱼ(1, ·) for j = 1..m, on the |k|^{2ε}-rescaled scale.
    h1_history: Vec<SpectralField>,
    /// gⱼ(1, ·) for j = 1..m, velocity scale.
    g_history: Vec<SpectralField>,
}

impl DecompositionState {
    pub fn new(v0: SpectralField) -> Self {
        Self { m: 0, c0_field: v0, h1_history: Vec::new(), g_history: Vec::new() }
    }

    /// Rebuilds a state from stored parts; the two histories must both have
    /// length `m`.
    pub fn from_parts(
        m: u64,
        v0: SpectralField,
        h1_history: Vec<SpectralField>,
        g_history: Vec<SpectralField>,
    ) -> Result<Self> {
        if h1_history.len() as u64 != m || g_history.len() as u64 != m {
            return Err(Error::InvalidParameter(format!(
                "history lengths ({}, {}) do not match m = {m}",
                h1_history.len(),
                g_history.len()
            )));
        }
        for f in h1_history.iter().chain(&g_history) {
            f.same_lattice(&v0)?;
        }
        Ok(Self { m, c0_field: v0, h1_history, g_history })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn initial_velocity(&self) -> &SpectralField {
        &self.c0_field
    }

    pub fn h1_history(&self) -> &[SpectralField] {
        &self.h1_history
    }

    pub fn g_history(&self) -> &[SpectralField] {
        &self.g_history
    }

    /// v(m) assembled from the stored decomposition.
    pub fn velocity(&self, params: &SolverParams) -> SpectralField {
        let mut v = h0_at(self, 0.0);
        v.add_assign(&h1_history_at(self, 0.0, params)).expect("shared lattice");
        v.add_assign(&g_history_at(self, 0.0)).expect("shared lattice");
        v
    }
}

/// H⁽⁰⁾(t) = e^{−(m+t)|k|²} v₀.
fn h0_at(state: &DecompositionState, t: f64) -> SpectralField {
    heat_multiply(&state.c0_field, state.m as f64 + t).expect("m + t >= 0")
}

/// Σⱼ e^{−(m−j+t)|k|²} fⱼ, skipping weights that underflow.
fn decayed_history(history: &[SpectralField], m: u64, t: f64, like: &SpectralField) -> SpectralField {
    let lattice = like.lattice();
    let mut out = SpectralField::zeros(lattice);
    for (idx, f) in history.iter().enumerate() {
        let lag = (m - (idx as u64 + 1)) as f64 + t;
        for ((k, acc), v) in lattice.sites().iter().zip(out.values_mut()).zip(f.values()) {
            if v.is_zero() {
                continue;
            }
            let w = heat_factor(k, lag);
            if w != 0.0 {
                *acc += v.scale(w);
            }
        }
    }
    out
}

/// Divides each entry by |k|^{2ε}.
fn unscale_h1(f: &SpectralField, params: &SolverParams) -> SpectralField {
    f.map(|k, v| v.scale((k.norm_sq() as f64).powf(-params.epsilon)))
}

fn h1_history_at(state: &DecompositionState, t: f64, params: &SolverParams) -> SpectralField {
    let hist = decayed_history(&state.h1_history, state.m, t, &state.c0_field);
    unscale_h1(&hist, params)
}

fn g_history_at(state: &DecompositionState, t: f64) -> SpectralField {
    decayed_history(&state.g_history, state.m, t, &state.c0_field)
}

pub fn assemble_h0(state: &DecompositionState, grid: TimeGrid) -> TimeSlicedField {
    TimeSlicedField::from_fn(grid, |i| h0_at(state, grid.time(i))).expect("grid-sized")
}

/// H⁽¹⁾(t) = Σⱼ e^{−(m−j+t)|k|²} hⱼ/|k|^{2ε} + h_{m+1}(t)/|k|^{2ε}.
pub fn assemble_h1(
    state: &DecompositionState,
    h1_next: &TimeSlicedField,
    params: &SolverParams,
) -> Result<TimeSlicedField> {
    h1_next.slice(0).same_lattice(&state.c0_field)?;
    let grid = *h1_next.grid();
    TimeSlicedField::from_fn(grid, |i| {
        let t = grid.time(i);
        let mut hist = decayed_history(&state.h1_history, state.m, t, &state.c0_field);
        hist.add_assign(h1_next.slice(i)).expect("checked lattice");
        unscale_h1(&hist, params)
    })
}

/// G(t) = Σⱼ e^{−(m−j+t)|k|²} gⱼ.
pub fn assemble_g(state: &DecompositionState, grid: TimeGrid) -> TimeSlicedField {
    TimeSlicedField::from_fn(grid, |i| g_history_at(state, grid.time(i))).expect("grid-sized")
}

/// h_{m+1}(t) = |k|^{2ε} (H⁽⁰⁾ ⊛ H⁽⁰⁾)(t).
pub fn compute_h1_next(h0: &TimeSlicedField, params: &SolverParams) -> Result<TimeSlicedField> {
    let star = star_product(h0, h0)?;
    Ok(star.map_slices(|f| f.map(|k, v| v.scale((k.norm_sq() as f64).powf(params.epsilon)))))
}

/// Sum of X ⊛ Y over the eight ordered pairs of {H⁽⁰⁾, H⁽¹⁾, G} other than
/// (H⁽⁰⁾, H⁽⁰⁾). Evaluated as H⁽⁰⁾⊛R + R⊛H⁽⁰⁾ + R⊛R with R = H⁽¹⁾ + G, which
/// is the same sum by bilinearity.
pub fn assemble_i1(h0: &TimeSlicedField, h1: &TimeSlicedField, g: &TimeSlicedField) -> Result<TimeSlicedField> {
    let rest = h1.add(g)?;
    let mut out = star_product(h0, &rest)?;
    out = out.add(&star_product(&rest, h0)?)?;
    out.add(&star_product(&rest, &rest)?)
}

/// I2(g) = Σ_{H′} (H′ ⊛ g + g ⊛ H′) over H′ ∈ {H⁽⁰⁾, H⁽¹⁾, G}, with the
/// three H′ pre-summed into `w`.
pub fn linear_term(w: &TimeSlicedField, g: &TimeSlicedField) -> Result<TimeSlicedField> {
    star_product(w, g)?.add(&star_product(g, w)?)
}

/// I3(g) = g ⊛ g.
pub fn quadratic_term(g: &TimeSlicedField) -> Result<TimeSlicedField> {
    star_product(g, g)
}

/// Max over slices of the 𝓕_{m}(c) norm.
pub fn sliced_fmc_norm(f: &TimeSlicedField, m: u64, params: &SolverParams) -> f64 {
    f.max_over_slices(|s| fmc_norm(s, m, params.decay_c, params.beta))
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub g: TimeSlicedField,
    pub iterations: usize,
    /// ‖Δ⁽ⁿ⁺¹⁾‖/‖Δ⁽ⁿ⁾‖ for consecutive nonzero updates.
    pub ratios: Vec<f64>,
    pub samples: ContractionSamples,
}

/// Solves g = I1 + I2(g) + I3(g) by iteration from g = 0, measuring updates in
/// the 𝓕_{m+1}(c) norm maximised over slices. `m` is the integer time at the
/// start of the interval.
pub fn fixed_point_solve_g(
    i1: &TimeSlicedField,
    h0: &TimeSlicedField,
    h1: &TimeSlicedField,
    g_hist: &TimeSlicedField,
    m: u64,
    params: &SolverParams,
) -> Result<FixedPointSolution> {
    let w = h0.add(h1)?.add(g_hist)?;
    let norm = |f: &TimeSlicedField| sliced_fmc_norm(f, m + 1, params);
    let mut samples = ContractionSamples { i1_norm: norm(i1), ..Default::default() };
    let mut g = TimeSlicedField::zeros(*i1.grid(), i1.lattice());
    let mut ratios = Vec::new();
    let mut prev_update: Option<f64> = None;

    for iteration in 1..=params.fp_max_iter {
        let (next, g_norm, i2_norm, i3_norm) = if g.is_zero() {
            (i1.clone(), 0.0, 0.0, 0.0)
        } else {
            let i2 = linear_term(&w, &g)?;
            let i3 = quadratic_term(&g)?;
            let (n2, n3) = (norm(&i2), norm(&i3));
            (i1.add(&i2)?.add(&i3)?, norm(&g), n2, n3)
        };
        if g_norm > 0.0 {
            samples.iterates.push(IterateNorms { g_norm, i2_norm, i3_norm });
        }
        let update = norm(&next.sub(&g)?);
        if !next.is_finite() || !update.is_finite() {
            return Err(Error::NonConvergence {
                iterations: iteration,
                last_update: update,
                last_ratio: ratios.last().copied(),
            });
        }
        if let Some(prev) = prev_update.filter(|p| *p > 0.0) {
            ratios.push(update / prev);
        }
        prev_update = Some(update);
        g = next;
        if update < params.fp_tol {
            samples.g_norm = norm(&g);
            return Ok(FixedPointSolution { g, iterations: iteration, ratios, samples });
        }
    }
    Err(Error::NonConvergence {
        iterations: params.fp_max_iter,
        last_update: prev_update.unwrap_or(f64::NAN),
        last_ratio: ratios.last().copied(),
    })
}

/// All pieces of the solution on one interval [m, m+1].
#[derive(Debug, Clone)]
pub struct IntervalSolution {
    /// Integer time at the start of the interval.
    pub m: u64,
    pub h0: TimeSlicedField,
    /// h_{m+1}(t), |k|^{2ε}-rescaled.
    pub h1_next: TimeSlicedField,
    pub h1: TimeSlicedField,
    pub g_hist: TimeSlicedField,
    pub i1: TimeSlicedField,
    pub fixed_point: FixedPointSolution,
}

impl IntervalSolution {
    /// v(m + tᵢ) = H⁽⁰⁾ + H⁽¹⁾ + G + g at grid index `i`.
    pub fn velocity(&self, i: usize) -> SpectralField {
        let mut v = self.h0.slice(i).clone();
        for part in [&self.h1, &self.g_hist, &self.fixed_point.g] {
            v.add_assign(part.slice(i)).expect("shared lattice");
        }
        v
    }

    pub fn velocity_at(&self, t: f64) -> Result<SpectralField> {
        Ok(self.velocity(self.h0.grid().index_of(t)?))
    }

    pub fn grid(&self) -> &TimeGrid {
        self.h0.grid()
    }

    pub fn g(&self) -> &TimeSlicedField {
        &self.fixed_point.g
    }
}

/// Runs every stage for the interval following `state` without advancing it.
pub fn solve_interval(state: &DecompositionState, params: &SolverParams) -> Result<IntervalSolution> {
    let grid = TimeGrid::unit(params.substeps);
    let h0 = assemble_h0(state, grid);
    let h1_next = compute_h1_next(&h0, params)?;
    let h1 = assemble_h1(state, &h1_next, params)?;
    let g_hist = assemble_g(state, grid);
    let i1 = assemble_i1(&h0, &h1, &g_hist)?;
    let fixed_point = fixed_point_solve_g(&i1, &h0, &h1, &g_hist, state.m, params)?;
    Ok(IntervalSolution { m: state.m, h0, h1_next, h1, g_hist, i1, fixed_point })
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: DecompositionState,
    pub record: CertificateRecord,
    pub interval: IntervalSolution,
}

/// One induction step: solves the interval, appends h_{m+1}(1) and g_{m+1}(1)
/// to the histories and fits the step's certificate.
pub fn advance_unit_interval(state: &DecompositionState, params: &SolverParams) -> Result<StepOutcome> {
    let interval = solve_interval(state, params)?;
    let j = state.m + 1;
    let h_new = interval.h1_next.last().clone();
    let g_new = interval.g().last().clone();

    let grid = *interval.grid();
    let velocities: Vec<SpectralField> = (0..grid.len()).map(|i| interval.velocity(i)).collect();
    let envelope = phi_envelope(velocities.iter().enumerate().map(|(i, v)| (state.m as f64 + grid.time(i), v)), params);
    let g_fit = g_bound_fit(&g_new, j, params);
    let coeffs = contraction_coefficients(&interval.fixed_point.samples);
    let record = CertificateRecord {
        m: j,
        d_h: h_bound_constant(&h_new, j, params),
        d_g: g_fit.constant,
        d_g_rate: g_fit.decay.map(|d| d.rate),
        d_h1: check_h1_envelope(&interval.h1, state.m, params),
        c1: coeffs.c1,
        c2: coeffs.c2,
        c3: coeffs.c3,
        contracting: coeffs.contracting,
        fp_iterations: interval.fixed_point.iterations,
        phi_envelope: envelope.sup,
    };

    let mut next = state.clone();
    next.m = j;
    next.h1_history.push(h_new);
    next.g_history.push(g_new);
    Ok(StepOutcome { state: next, record, interval })
}

/// v(m + t) for a grid time t of the interval following `state`. At t = 0
/// this is read straight from the stored decomposition.
pub fn reconstruct_v(state: &DecompositionState, t: f64, params: &SolverParams) -> Result<SpectralField> {
    let grid = TimeGrid::unit(params.substeps);
    let i = grid.index_of(t)?;
    if i == 0 {
        return Ok(state.velocity(params));
    }
    Ok(solve_interval(state, params)?.velocity(i))
}
