//! Initial conditions.
//!
//! Deterministic kinds:
//! - `single_mode`: (1,0,0) ↦ (0, δ, 0)
//! - `two_mode`: (1,0,0) ↦ δ(0, 0.6, 0.8) and (0,1,0) ↦ δ(0.8, 0, 0.6)
//!
//! The two-mode polarizations are chosen so that the pair interacts and
//! feeds a remainder with enough modes for a decay-rate fit.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use torus_ns::operators::leray_project;
use torus_ns::{CVec3, Lattice, SpectralField, WaveVector};

use crate::checkpoint;
use crate::config::{IcKind, RunConfig};
use crate::error::{CliError, Result};
use num_complex::Complex64;

/// Builds the initial velocity described by `cfg` on `lattice`.
pub fn generate_ic(cfg: &RunConfig, lattice: &Arc<Lattice>) -> Result<SpectralField> {
    let delta = cfg.params.delta;
    let alpha = cfg.params.alpha;
    let field = match cfg.ic_kind {
        IcKind::RandomPhiBall => random_phi_ball(lattice, delta, alpha, cfg.rng_seed, cfg.reality_symmetry),
        IcKind::SingleMode => deterministic(
            lattice,
            &[(WaveVector::new(1, 0, 0), CVec3::real(0.0, 1.0, 0.0))],
            delta,
            alpha,
            cfg.reality_symmetry,
        )?,
        IcKind::TwoMode => deterministic(
            lattice,
            &[
                (WaveVector::new(1, 0, 0), CVec3::real(0.0, 0.6, 0.8)),
                (WaveVector::new(0, 1, 0), CVec3::real(0.8, 0.0, 0.6)),
            ],
            delta,
            alpha,
            cfg.reality_symmetry,
        )?,
        IcKind::FromCheckpoint => {
            let path = cfg
                .ic_checkpoint
                .as_ref()
                .ok_or_else(|| CliError::Config("ic_kind = from_checkpoint needs ic_checkpoint".into()))?;
            checkpoint::load(path, lattice)?
        }
    };
    Ok(field)
}

/// Shrinks `v` by ulps until |k|^α|v| ≤ δ, evaluated exactly as the Φ norm does.
fn clamp_to_ball(k: &WaveVector, mut v: CVec3, delta: f64, alpha: f64) -> CVec3 {
    let weight = k.norm().powf(alpha);
    while weight * v.norm() > delta {
        v = v.scale(1.0 - f64::EPSILON);
    }
    v
}

fn random_unit_direction(k: &WaveVector, rng: &mut ChaCha8Rng) -> CVec3 {
    loop {
        let mut draw = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let raw = CVec3::new(draw(), draw(), draw());
        let projected = leray_project(k, &raw).expect("lattice sites are nonzero");
        let n = projected.norm();
        if n > 1e-8 {
            return projected.scale(1.0 / n);
        }
    }
}

/// Per site: a uniformly random complex direction, Leray-projected and
/// normalized, scaled so that |k|^α|v₀(k)| is uniform in [0, δ]. With
/// `reality` the value at −k is the conjugate of the value at k.
pub fn random_phi_ball(lattice: &Arc<Lattice>, delta: f64, alpha: f64, seed: u64, reality: bool) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mirror = lattice.negation_map();
    let mut values = vec![CVec3::ZERO; lattice.len()];
    for (i, k) in lattice.sites().iter().enumerate() {
        if reality && mirror[i] < i {
            continue;
        }
        let dir = random_unit_direction(k, &mut rng);
        let u: f64 = rng.random();
        let v = clamp_to_ball(k, dir.scale(u * delta / k.norm().powf(alpha)), delta, alpha);
        values[i] = v;
        if reality {
            values[mirror[i]] = v.conj();
        }
    }
    SpectralField::from_values(lattice, values)
}

/// Places unit polarizations at the given sites, scaled to Φ-norm δ.
fn deterministic(
    lattice: &Arc<Lattice>,
    modes: &[(WaveVector, CVec3)],
    delta: f64,
    alpha: f64,
    reality: bool,
) -> Result<SpectralField> {
    let mut field = SpectralField::zeros(lattice);
    for (k, dir) in modes {
        let v = clamp_to_ball(k, dir.scale(delta / k.norm().powf(alpha)), delta, alpha);
        field.set(k, v)?;
        if reality {
            field.set(&k.neg(), v.conj())?;
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use torus_ns::{phi_norm, LatticeSpec};

    use super::*;

    fn cfg(kind: IcKind) -> RunConfig {
        RunConfig { ic_kind: kind, ..RunConfig::default() }
    }

    #[test]
    fn single_mode_matches_documented_site() {
        let c = cfg(IcKind::SingleMode);
        let lat = Lattice::new(c.lattice).unwrap();
        let f = generate_ic(&c, &lat).unwrap();
        assert_eq!(f.support_len(), 1);
        assert_eq!(f.get(&WaveVector::new(1, 0, 0)), CVec3::real(0.0, 1e-3, 0.0));
        assert_eq!(phi_norm(&f, c.params.alpha), 1e-3);
    }

    #[test]
    fn two_mode_sits_on_the_ball_boundary() {
        let c = cfg(IcKind::TwoMode);
        let lat = Lattice::new(c.lattice).unwrap();
        let f = generate_ic(&c, &lat).unwrap();
        assert_eq!(f.support_len(), 2);
        let phi = phi_norm(&f, c.params.alpha);
        assert!((1e-3 * (1.0 - 4.0 * f64::EPSILON)..=1e-3).contains(&phi), "{phi:e}");
        assert!(f.is_divergence_free(0.0));
    }

    #[test]
    fn random_ic_respects_bound_and_divergence() {
        let lat = Lattice::new(LatticeSpec::ball(4)).unwrap();
        for seed in 0..5 {
            let f = random_phi_ball(&lat, 0.37, 2.25, seed, false);
            assert!(phi_norm(&f, 2.25) <= 0.37);
            assert!(f.is_divergence_free(1e-12));
            assert_eq!(f.support_len(), lat.len());
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let lat = Lattice::new(LatticeSpec::cube(2)).unwrap();
        let a = random_phi_ball(&lat, 1e-3, 2.25, 42, true);
        let b = random_phi_ball(&lat, 1e-3, 2.25, 42, true);
        let c = random_phi_ball(&lat, 1e-3, 2.25, 43, true);
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x == y));
        assert!(a.values() != c.values());
    }

    #[test]
    fn reality_symmetry_is_exact() {
        let lat = Lattice::new(LatticeSpec::ball(3)).unwrap();
        let f = random_phi_ball(&lat, 1e-2, 2.25, 7, true);
        assert_eq!(f.reality_defect(), 0.0);
        let g = random_phi_ball(&lat, 1e-2, 2.25, 7, false);
        assert!(g.reality_defect() > 0.0);
    }
}
