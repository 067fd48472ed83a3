use crate::error::{Error, Result};
use crate::lattice::WaveVector;
use crate::vec3::CVec3;

/// Projects `x` onto the plane orthogonal to `k`: x − (⟨k,x⟩/|k|²) k.
pub fn leray_project(k: &WaveVector, x: &CVec3) -> Result<CVec3> {
    if k.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    Ok(project_nonzero(k, x))
}

#[inline]
pub(crate) fn project_nonzero(k: &WaveVector, x: &CVec3) -> CVec3 {
    let kc = k.components();
    let s = x.dot_real(&kc) / k.norm_sq() as f64;
    CVec3([x.0[0] - s * kc[0], x.0[1] - s * kc[1], x.0[2] - s * kc[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_the_parallel_component() {
        let p = leray_project(&WaveVector::new(1, 0, 0), &CVec3::real(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(p, CVec3::real(0.0, 2.0, 3.0));
        let p = leray_project(&WaveVector::new(0, 0, 2), &CVec3::real(0.0, 0.0, 5.0)).unwrap();
        assert_eq!(p, CVec3::real(0.0, 0.0, 0.0));
        let p = leray_project(&WaveVector::new(1, 1, 0), &CVec3::real(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(p, CVec3::real(0.5, -0.5, 0.0));
    }

    #[test]
    fn rejects_origin() {
        assert_eq!(leray_project(&WaveVector::ZERO, &CVec3::real(1.0, 0.0, 0.0)), Err(Error::ZeroWaveVector));
    }

    #[test]
    fn annihilates_k() {
        let k = WaveVector::new(2, -3, 5);
        let [x, y, z] = k.components();
        let p = leray_project(&k, &CVec3::real(x, y, z)).unwrap();
        assert_eq!(p, CVec3::ZERO);
    }
}
