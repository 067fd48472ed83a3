//! Time grids, time-sliced fields and the Duhamel integral against the heat
//! semigroup.
//!
//! Quadrature: on each substep [sᵢ, sᵢ₊₁] the source is replaced by the mean
//! of its two endpoint values and the exponential factor is integrated
//! exactly, so the per-substep weight of that mean is
//! (exp{−(t−sᵢ₊₁)|k|²} − exp{−(t−sᵢ)|k|²})/|k|². The rule is exact for
//! sources constant in s and second order otherwise.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{SpectralField, UNDERFLOW_CUTOFF};
use crate::lattice::Lattice;
use crate::operators::bilinear::bilinear;
use crate::vec3::CVec3;

/// Uniform grid `tᵢ = i / substeps`, `i = 0..=intervals`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    substeps: usize,
    intervals: usize,
}

impl TimeGrid {
    /// The unit interval [0, 1] split into `substeps` pieces.
    pub fn unit(substeps: usize) -> Self {
        assert!(substeps > 0);
        Self { substeps, intervals: substeps }
    }

    /// [0, horizon] at `substeps` pieces per unit time.
    pub fn span(substeps: usize, horizon: usize) -> Self {
        assert!(substeps > 0 && horizon > 0);
        Self { substeps, intervals: substeps * horizon }
    }

    /// `intervals` substeps of width `1 / substeps`.
    pub fn with_intervals(substeps: usize, intervals: usize) -> Self {
        assert!(substeps > 0 && intervals > 0);
        Self { substeps, intervals }
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / self.substeps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.substeps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.time(self.intervals)
    }

    /// Grid index of `t`, which must coincide with a grid point.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t <= self.end()) {
            return Err(Error::OffGrid(t));
        }
        let i = (t * self.substeps as f64).round() as usize;
        if (self.time(i) - t).abs() <= 1e-12 * t.max(1.0) {
            Ok(i)
        } else {
            Err(Error::OffGrid(t))
        }
    }
}

/// A field sampled at every point of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlicedField {
    grid: TimeGrid,
    slices: Vec<SpectralField>,
}

impl TimeSlicedField {
    pub fn new(grid: TimeGrid, slices: Vec<SpectralField>) -> Result<Self> {
        if slices.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} slices for a grid of {} points", slices.len(), grid.len())));
        }
        for s in &slices[1..] {
            s.same_lattice(&slices[0])?;
        }
        Ok(Self { grid, slices })
    }

    pub fn zeros(grid: TimeGrid, lattice: &Arc<Lattice>) -> Self {
        Self { grid, slices: vec![SpectralField::zeros(lattice); grid.len()] }
    }

    /// Samples `f(i, tᵢ)` at every grid point.
    pub fn from_fn(grid: TimeGrid, f: impl FnMut(usize) -> SpectralField) -> Result<Self> {
        Self::new(grid, (0..grid.len()).map(f).collect())
    }

    /// Same field at every grid point.
    pub fn constant(grid: TimeGrid, field: &SpectralField) -> Self {
        Self { grid, slices: vec![field.clone(); grid.len()] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        self.slices[0].lattice()
    }

    pub fn slices(&self) -> &[SpectralField] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &SpectralField {
        &self.slices[i]
    }

    pub fn last(&self) -> &SpectralField {
        self.slices.last().expect("grids have at least two points")
    }

    /// Slice at grid time `t`.
    pub fn at(&self, t: f64) -> Result<&SpectralField> {
        Ok(&self.slices[self.grid.index_of(t)?])
    }

    pub fn is_zero(&self) -> bool {
        self.slices.iter().all(SpectralField::is_zero)
    }

    pub fn is_finite(&self) -> bool {
        self.slices.iter().all(SpectralField::is_finite)
    }

    pub fn compatible(&self, other: &TimeSlicedField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        self.slices[0].same_lattice(&other.slices[0])
    }

    pub fn add(&self, other: &TimeSlicedField) -> Result<Self> {
        self.compatible(other)?;
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Self { grid: self.grid, slices })
    }

    pub fn sub(&self, other: &TimeSlicedField) -> Result<Self> {
        self.compatible(other)?;
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Self { grid: self.grid, slices })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid, slices: self.slices.iter().map(|f| f.scaled(s)).collect() }
    }

    /// Applies `f` slice by slice.
    pub fn map_slices(&self, f: impl FnMut(&SpectralField) -> SpectralField) -> Self {
        Self { grid: self.grid, slices: self.slices.iter().map(f).collect() }
    }

    /// Largest value of `norm` over the slices.
    pub fn max_over_slices(&self, norm: impl Fn(&SpectralField) -> f64) -> f64 {
        self.slices.iter().map(norm).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &TimeSlicedField) -> Result<f64> {
        self.compatible(other)?;
        self.slices.iter().zip(&other.slices).try_fold(0.0f64, |acc, (a, b)| Ok(acc.max(a.max_abs_diff(b)?)))
    }
}

/// (1 − e^{−hκ})/κ, evaluated without cancellation.
#[inline]
fn phi1(h: f64, kappa: f64) -> f64 {
    -(-h * kappa).exp_m1() / kappa
}

#[inline]
fn flushed_exp(x: f64) -> f64 {
    let w = x.exp();
    if w < UNDERFLOW_CUTOFF {
        0.0
    } else {
        w
    }
}

/// ∫₀ᵗ exp{−(t−s)|k|²} source(s, k) ds at one grid time, by direct weighted
/// summation over the substeps in [0, t].
pub fn duhamel_integrate(source: &TimeSlicedField, t: f64) -> Result<SpectralField> {
    let grid = source.grid;
    let n = grid.index_of(t)?;
    let lattice = source.lattice();
    let h = grid.step();
    let values = lattice
        .sites()
        .iter()
        .enumerate()
        .map(|(ki, k)| {
            let kappa = k.norm_sq() as f64;
            let base = phi1(h, kappa) * 0.5;
            let mut acc = CVec3::ZERO;
            for i in 0..n {
                let w = flushed_exp(-((n - i - 1) as f64) * h * kappa) * base;
                if w == 0.0 {
                    continue;
                }
                let mean = source.slices[i].values()[ki] + source.slices[i + 1].values()[ki];
                acc += mean.scale(w);
            }
            acc
        })
        .collect();
    Ok(SpectralField::from_values(lattice, values))
}

/// Duhamel integral at every grid time, by the one-step recursion
/// J(tₙ₊₁) = e^{−h|k|²} J(tₙ) + (1 − e^{−h|k|²})/|k|² · (f(tₙ) + f(tₙ₊₁))/2.
pub fn duhamel_all(source: &TimeSlicedField) -> TimeSlicedField {
    let grid = source.grid;
    let lattice = source.lattice();
    let h = grid.step();
    let n_sites = lattice.len();
    let coeffs: Vec<(f64, f64)> = lattice
        .sites()
        .iter()
        .map(|k| {
            let kappa = k.norm_sq() as f64;
            (flushed_exp(-h * kappa), 0.5 * phi1(h, kappa))
        })
        .collect();

    // Site-major evaluation keeps each mode's recursion sequential.
    let per_site: Vec<Vec<CVec3>> = (0..n_sites)
        .into_par_iter()
        .map(|ki| {
            let (decay, w) = coeffs[ki];
            let mut out = Vec::with_capacity(grid.len());
            let mut acc = CVec3::ZERO;
            out.push(acc);
            for i in 0..grid.intervals() {
                let mean = source.slices[i].values()[ki] + source.slices[i + 1].values()[ki];
                acc = acc.scale(decay) + mean.scale(w);
                out.push(acc);
            }
            out
        })
        .collect();

    let slices =
        (0..grid.len()).map(|i| SpectralField::from_values(lattice, per_site.iter().map(|s| s[i]).collect())).collect();
    TimeSlicedField { grid, slices }
}

/// (U ⊛ V)(t) = ∫₀ᵗ exp{−(t−s)|k|²} B(U(s), V(s)) ds at every grid time,
/// with B the bilinear convolution (2πi prefactor included).
pub fn star_product(u: &TimeSlicedField, v: &TimeSlicedField) -> Result<TimeSlicedField> {
    u.compatible(v)?;
    let source = TimeSlicedField {
        grid: u.grid,
        slices: u.slices.iter().zip(&v.slices).map(|(a, b)| bilinear(a, b)).collect::<Result<_>>()?,
    };
    Ok(duhamel_all(&source))
}
