//! The quadratic term of the mild equation as a lattice convolution.
//!
//! out(k) = 2πi Σ_l ⟨k, u(k−l)⟩ P_k v(l), summed over pairs with l and k − l
//! both nonzero and inside the lattice. Projection is linear, so the sum is
//! accumulated first and projected once per output site.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::field::SpectralField;
use crate::operators::leray::project_nonzero;
use crate::vec3::CVec3;

/// 2πi
pub const PREFACTOR: Complex64 = Complex64::new(0.0, 2.0 * PI);

pub fn bilinear(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_lattice(v)?;
    let lattice = u.lattice();
    if u.is_zero() || v.is_zero() {
        return Ok(SpectralField::zeros(lattice));
    }
    let uv = u.values();
    let vv = v.values();
    // Skipping zero sources is exact and makes sparse fields cheap.
    let v_live: Vec<bool> = vv.iter().map(|x| !x.is_zero()).collect();
    let u_live: Vec<bool> = uv.iter().map(|x| !x.is_zero()).collect();

    let values: Vec<CVec3> = (0..lattice.len())
        .into_par_iter()
        .map(|ki| {
            let k = lattice.site(ki);
            let kc = k.components();
            let mut acc = CVec3::ZERO;
            for &(l, kl) in lattice.pairs(ki) {
                let (l, kl) = (l as usize, kl as usize);
                if !v_live[l] || !u_live[kl] {
                    continue;
                }
                let s = uv[kl].dot_real(&kc);
                if s.re == 0.0 && s.im == 0.0 {
                    continue;
                }
                acc += vv[l].scale_c(s);
            }
            if acc.is_zero() {
                acc
            } else {
                project_nonzero(k, &acc).scale_c(PREFACTOR)
            }
        })
        .collect();
    Ok(SpectralField::from_values(lattice, values))
}
