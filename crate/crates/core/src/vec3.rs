//! Complex 3-vectors, the per-mode amplitude of every spectral field.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub const ZERO: CVec3 = CVec3([Complex64::new(0.0, 0.0); 3]);

    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self([x, y, z])
    }

    pub fn real(x: f64, y: f64, z: f64) -> Self {
        Self([Complex64::new(x, 0.0), Complex64::new(y, 0.0), Complex64::new(z, 0.0)])
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Complex Euclidean magnitude sqrt(Σ|xᵢ|²).
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Bilinear pairing ⟨k, x⟩ = Σ kᵢ xᵢ with a real vector (no conjugation).
    #[inline]
    pub fn dot_real(&self, k: &[f64; 3]) -> Complex64 {
        self.0[0] * k[0] + self.0[1] * k[1] + self.0[2] * k[2]
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    #[inline]
    pub fn scale_c(&self, s: Complex64) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn conj(&self) -> Self {
        Self([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest absolute deviation over the six real components.
    pub fn max_abs_diff(&self, other: &CVec3) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs())).fold(0.0, f64::max)
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    #[inline]
    fn add(self, rhs: CVec3) -> CVec3 {
        CVec3([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl AddAssign for CVec3 {
    #[inline]
    fn add_assign(&mut self, rhs: CVec3) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    #[inline]
    fn sub(self, rhs: CVec3) -> CVec3 {
        CVec3([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl Neg for CVec3 {
    type Output = CVec3;
    fn neg(self) -> CVec3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for CVec3 {
    type Output = CVec3;
    #[inline]
    fn mul(self, rhs: f64) -> CVec3 {
        self.scale(rhs)
    }
}

impl Mul<Complex64> for CVec3 {
    type Output = CVec3;
    #[inline]
    fn mul(self, rhs: Complex64) -> CVec3 {
        self.scale_c(rhs)
    }
}
