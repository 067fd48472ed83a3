//! Binary field checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic    8 bytes  "TNSFIELD"
//! version  u32
//! rule     u8       0 = euclidean_ball, 1 = sup_cube
//! k_max    u32
//! count    u64      number of records, equal to the lattice size
//! records  count × (kx, ky, kz: i32; re/im of x, y, z: 6 × f64)
//! ```
//!
//! Records follow lattice order, so a load reproduces the field bit for bit.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use torus_ns::{CVec3, Lattice, LatticeSpec, SpectralField, TruncationRule};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"TNSFIELD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 1 + 4 + 8;
const RECORD_LEN: usize = 3 * 4 + 6 * 8;

fn rule_tag(rule: TruncationRule) -> u8 {
    match rule {
        TruncationRule::EuclideanBall => 0,
        TruncationRule::SupCube => 1,
    }
}

pub fn encode(field: &SpectralField) -> Vec<u8> {
    let lattice = field.lattice();
    let spec = lattice.spec();
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * lattice.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(rule_tag(spec.truncation_rule));
    out.extend_from_slice(&spec.k_max.to_le_bytes());
    out.extend_from_slice(&(lattice.len() as u64).to_le_bytes());
    for (k, v) in lattice.sites().iter().zip(field.values()) {
        for c in [k.kx, k.ky, k.kz] {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for z in v.0 {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| CliError::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(chunk.try_into().expect("slice of length N"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Reads and checks the header, returning the stored lattice spec.
fn read_header(r: &mut Reader) -> Result<(LatticeSpec, u64)> {
    if &r.take::<8>()? != MAGIC {
        return Err(CliError::Checkpoint("bad magic, not a field checkpoint".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CliError::Checkpoint(format!("unsupported version {version} (expected {VERSION})")));
    }
    let rule = match r.u8()? {
        0 => TruncationRule::EuclideanBall,
        1 => TruncationRule::SupCube,
        t => return Err(CliError::Checkpoint(format!("unknown truncation tag {t}"))),
    };
    let k_max = r.u32()?;
    let count = r.u64()?;
    Ok((LatticeSpec::new(k_max, rule), count))
}

/// Lattice spec stored in a checkpoint header.
pub fn peek_spec(bytes: &[u8]) -> Result<LatticeSpec> {
    Ok(read_header(&mut Reader { bytes, pos: 0 })?.0)
}

/// Decodes a checkpoint written on `lattice`. Any mismatch or corruption is an
/// error; no partial field is ever returned.
pub fn decode(bytes: &[u8], lattice: &Arc<Lattice>) -> Result<SpectralField> {
    let mut r = Reader { bytes, pos: 0 };
    let (spec, count) = read_header(&mut r)?;
    if spec != *lattice.spec() {
        return Err(CliError::Solver(torus_ns::Error::LatticeMismatch { left: spec, right: *lattice.spec() }));
    }
    if count != lattice.len() as u64 {
        return Err(CliError::Checkpoint(format!(
            "record count {count} does not match lattice size {}",
            lattice.len()
        )));
    }
    let expected = HEADER_LEN + RECORD_LEN * lattice.len();
    if bytes.len() < expected {
        return Err(CliError::Checkpoint(format!("truncated: {} of {expected} bytes", bytes.len())));
    }
    if bytes.len() > expected {
        return Err(CliError::Checkpoint(format!("{} trailing bytes", bytes.len() - expected)));
    }
    let mut values = Vec::with_capacity(lattice.len());
    for site in lattice.sites() {
        let (kx, ky, kz) = (r.i32()?, r.i32()?, r.i32()?);
        if (kx, ky, kz) != (site.kx, site.ky, site.kz) {
            return Err(CliError::Checkpoint(format!("record ({kx},{ky},{kz}) out of lattice order, expected {site}")));
        }
        let mut v = [Complex64::new(0.0, 0.0); 3];
        for z in &mut v {
            *z = Complex64::new(r.f64()?, r.f64()?);
        }
        values.push(CVec3(v));
    }
    Ok(SpectralField::from_values(lattice, values))
}

pub fn save(path: &Path, field: &SpectralField) -> Result<()> {
    std::fs::write(path, encode(field)).map_err(CliError::io(path))
}

pub fn load(path: &Path, lattice: &Arc<Lattice>) -> Result<SpectralField> {
    decode(&std::fs::read(path).map_err(CliError::io(path))?, lattice)
}

/// Loads a checkpoint on the lattice named by its own header.
pub fn load_any(path: &Path) -> Result<SpectralField> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    let lattice = Lattice::new(peek_spec(&bytes)?)?;
    decode(&bytes, &lattice)
}
