//! Spectral vector fields on a truncated lattice and the norms they are
//! measured in.
//!
//! Fields are stored densely over the lattice sites; a site whose amplitude is
//! exactly zero is outside the support. The origin is never a lattice site, so
//! no field can carry a `k = 0` entry.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, WaveVector};
use crate::vec3::CVec3;

/// Heat factors below this are flushed to exact zero.
pub const UNDERFLOW_CUTOFF: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct SpectralField {
    lattice: Arc<Lattice>,
    values: Vec<CVec3>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.spec() == other.lattice.spec() && self.values == other.values
    }
}

impl SpectralField {
    pub fn zeros(lattice: &Arc<Lattice>) -> Self {
        Self { lattice: Arc::clone(lattice), values: vec![CVec3::ZERO; lattice.len()] }
    }

    /// Builds a field from `(site, amplitude)` entries. Sites outside the
    /// lattice (including the origin) are rejected.
    pub fn from_entries<I>(lattice: &Arc<Lattice>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WaveVector, CVec3)>,
    {
        let mut field = Self::zeros(lattice);
        for (k, v) in entries {
            let i = lattice
                .index_of(&k)
                .ok_or_else(|| Error::InvalidParameter(format!("site {k} is not in the lattice")))?;
            field.values[i] = v;
        }
        Ok(field)
    }

    pub fn from_values(lattice: &Arc<Lattice>, values: Vec<CVec3>) -> Self {
        assert_eq!(values.len(), lattice.len(), "one amplitude per lattice site");
        Self { lattice: Arc::clone(lattice), values }
    }

    /// Builds a field site by site.
    pub fn from_fn(lattice: &Arc<Lattice>, mut f: impl FnMut(&WaveVector) -> CVec3) -> Self {
        let values = lattice.sites().iter().map(&mut f).collect();
        Self { lattice: Arc::clone(lattice), values }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn values(&self) -> &[CVec3] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [CVec3] {
        &mut self.values
    }

    pub fn get(&self, k: &WaveVector) -> CVec3 {
        self.lattice.index_of(k).map_or(CVec3::ZERO, |i| self.values[i])
    }

    pub fn set(&mut self, k: &WaveVector, v: CVec3) -> Result<()> {
        let i = self
            .lattice
            .index_of(k)
            .ok_or_else(|| Error::InvalidParameter(format!("site {k} is not in the lattice")))?;
        self.values[i] = v;
        Ok(())
    }

    /// Supported `(site, amplitude)` pairs in lattice order.
    pub fn support(&self) -> impl Iterator<Item = (&WaveVector, &CVec3)> {
        self.lattice.sites().iter().zip(&self.values).filter(|(_, v)| !v.is_zero())
    }

    pub fn support_len(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(CVec3::is_zero)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(CVec3::is_finite)
    }

    pub fn same_lattice(&self, other: &SpectralField) -> Result<()> {
        if Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice.spec() == other.lattice.spec() {
            Ok(())
        } else {
            Err(Error::LatticeMismatch { left: *self.lattice.spec(), right: *other.lattice.spec() })
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|_, v| v.scale(s))
    }

    pub fn scaled_c(&self, s: Complex64) -> Self {
        self.map(|_, v| v.scale_c(s))
    }

    /// Applies a per-site map `(k, v) -> v'`.
    pub fn map(&self, mut f: impl FnMut(&WaveVector, &CVec3) -> CVec3) -> Self {
        let values = self.lattice.sites().iter().zip(&self.values).map(|(k, v)| f(k, v)).collect();
        Self { lattice: Arc::clone(&self.lattice), values }
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.same_lattice(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.same_lattice(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// `self += other`; lattices must already agree.
    pub fn add_assign(&mut self, other: &SpectralField) -> Result<()> {
        self.same_lattice(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += *b;
        }
        Ok(())
    }

    /// `self += s · other`
    pub fn add_scaled(&mut self, other: &SpectralField, s: f64) -> Result<()> {
        self.same_lattice(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b.scale(s);
        }
        Ok(())
    }

    fn zip_with(&self, other: &SpectralField, f: impl Fn(CVec3, CVec3) -> CVec3) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self { lattice: Arc::clone(&self.lattice), values }
    }

    /// Largest absolute component-wise difference.
    pub fn max_abs_diff(&self, other: &SpectralField) -> Result<f64> {
        self.same_lattice(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max))
    }

    /// Largest per-site magnitude sup_k |f(k)|.
    pub fn sup_magnitude(&self) -> f64 {
        self.values.iter().map(CVec3::norm).fold(0.0, f64::max)
    }

    /// Largest relative violation |⟨f(k), k⟩| / (|f(k)| |k|) over the support.
    pub fn divergence_defect(&self) -> f64 {
        self.support().map(|(k, v)| v.dot_real(&k.components()).norm() / (v.norm() * k.norm())).fold(0.0, f64::max)
    }

    pub fn is_divergence_free(&self, eps_div: f64) -> bool {
        self.divergence_defect() <= eps_div
    }

    /// Largest |f(−k) − conj f(k)| over the lattice.
    pub fn reality_defect(&self) -> f64 {
        let neg = self.lattice.negation_map();
        self.values.iter().zip(&neg).map(|(v, &j)| self.values[j].max_abs_diff(&v.conj())).fold(0.0, f64::max)
    }
}

/// Φ(α) norm: sup_k |k|^α |f(k)|.
pub fn phi_norm(f: &SpectralField, alpha: f64) -> f64 {
    f.support().map(|(k, v)| k.norm().powf(alpha) * v.norm()).fold(0.0, f64::max)
}

/// 𝓕ₘ(c) norm: the least C with |f(k)| ≤ C |k|^−β exp(−c√m|k|) on the lattice.
pub fn fmc_norm(f: &SpectralField, m: u64, c: f64, beta: f64) -> f64 {
    let rate = c * (m as f64).sqrt();
    f.support()
        .map(|(k, v)| {
            let kn = k.norm();
            kn.powf(beta) * (rate * kn).exp() * v.norm()
        })
        .fold(0.0, f64::max)
}

/// exp(−t|k|²) for one site, flushed to zero below [`UNDERFLOW_CUTOFF`].
#[inline]
pub fn heat_factor(k: &WaveVector, t: f64) -> f64 {
    let w = (-t * k.norm_sq() as f64).exp();
    if w < UNDERFLOW_CUTOFF {
        0.0
    } else {
        w
    }
}

/// Heat semigroup: each entry multiplied by exp(−t|k|²).
pub fn heat_multiply(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.map(|k, v| v.scale(heat_factor(k, t))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    fn ball(r: u32) -> Arc<Lattice> {
        Lattice::new(LatticeSpec::ball(r)).unwrap()
    }

    /// A unit vector orthogonal to the (nonzero) real vector k.
    fn unit_perp(k: &WaveVector) -> CVec3 {
        let [x, y, z] = k.components();
        let (a, b, c) = if x.abs() > 0.0 || y.abs() > 0.0 { (-y, x, 0.0) } else { (0.0, -z, y) };
        let n = (a * a + b * b + c * c).sqrt();
        CVec3::real(a / n, b / n, c / n)
    }

    #[test]
    fn zero_field_norms_vanish() {
        let z = SpectralField::zeros(&ball(2));
        assert_eq!(phi_norm(&z, 2.25), 0.0);
        assert_eq!(fmc_norm(&z, 3, 0.5, 3.5), 0.0);
    }

    #[test]
    fn saturating_fields_have_unit_norm() {
        let lat = ball(3);
        let alpha = 2.25;
        let f = SpectralField::from_fn(&lat, |k| unit_perp(k).scale(k.norm().powf(-alpha)));
        assert!((phi_norm(&f, alpha) - 1.0).abs() < 1e-14);

        let (m, c, beta) = (4u64, 0.5, 3.5);
        let g = SpectralField::from_fn(&lat, |k| {
            unit_perp(k).scale(k.norm().powf(-beta) * (-c * (m as f64).sqrt() * k.norm()).exp())
        });
        assert!((fmc_norm(&g, m, c, beta) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_site_phi_norm() {
        let lat = ball(2);
        let k = WaveVector::new(1, 1, 1);
        let f = SpectralField::from_entries(&lat, [(k, CVec3::real(2.0, -2.0, 0.0).scale(1.0 / 2f64.sqrt()))]).unwrap();
        let expected = 2.0 * 3f64.powf(1.125);
        assert!((phi_norm(&f, 2.25) - expected).abs() < 1e-12);
        assert!((expected - 6.883216142639262).abs() < 1e-12);
    }

    #[test]
    fn single_site_fmc_norm() {
        let lat = ball(2);
        let f = SpectralField::from_entries(&lat, [(WaveVector::new(1, 0, 0), CVec3::real(0.0, 1.0, 0.0))]).unwrap();
        assert!((fmc_norm(&f, 4, 0.5, 3.5) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn heat_factors() {
        let lat = ball(2);
        let k1 = WaveVector::new(1, 0, 0);
        let k3 = WaveVector::new(1, 1, 1);
        let f =
            SpectralField::from_entries(&lat, [(k1, CVec3::real(0.0, 1.0, 0.0)), (k3, CVec3::real(1.0, -1.0, 0.0))])
                .unwrap();
        assert_eq!(heat_multiply(&f, 0.0).unwrap(), f);
        let h = heat_multiply(&f, 1.0).unwrap();
        assert_eq!(h.get(&k1).0[1].re, (-1.0f64).exp());
        let h = heat_multiply(&f, 0.5).unwrap();
        assert!((h.get(&k3).0[0].re - 0.22313016014842982).abs() < 1e-16);
        assert!(matches!(heat_multiply(&f, -0.1), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn heat_underflow_removes_support() {
        let lat = ball(4);
        let k = WaveVector::new(4, 0, 0);
        let f = SpectralField::from_entries(&lat, [(k, CVec3::real(0.0, 1.0, 0.0))]).unwrap();
        // exp(-16 * 50) is far below the cutoff
        let h = heat_multiply(&f, 50.0).unwrap();
        assert!(h.is_zero());
        assert_eq!(h.support_len(), 0);
    }

    #[test]
    fn mismatched_lattices_are_rejected() {
        let a = SpectralField::zeros(&ball(2));
        let b = SpectralField::zeros(&ball(3));
        assert!(matches!(a.add(&b), Err(Error::LatticeMismatch { .. })));
    }

    #[test]
    fn entries_outside_lattice_are_rejected() {
        let lat = ball(1);
        assert!(SpectralField::from_entries(&lat, [(WaveVector::ZERO, CVec3::real(1.0, 0.0, 0.0))]).is_err());
        assert!(SpectralField::from_entries(&lat, [(WaveVector::new(1, 1, 0), CVec3::ZERO)]).is_err());
    }
}
