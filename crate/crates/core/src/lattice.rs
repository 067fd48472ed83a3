//! Integer wave vectors and truncated Fourier lattices.
//!
//! A [`Lattice`] is the finite set of nonzero sites kept by the Galerkin
//! truncation. It also carries the precomputed convolution table used by the
//! bilinear operator: for every output site `k`, the pairs `(l, k - l)` with
//! both members inside the lattice.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A site `k` of the integer lattice ℤ³ with its squared length cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveVector {
    pub kx: i32,
    pub ky: i32,
    pub kz: i32,
    norm_sq: i64,
}

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector { kx: 0, ky: 0, kz: 0, norm_sq: 0 };

    pub fn new(kx: i32, ky: i32, kz: i32) -> Self {
        let norm_sq = (kx as i64).pow(2) + (ky as i64).pow(2) + (kz as i64).pow(2);
        Self { kx, ky, kz, norm_sq }
    }

    /// |k|², exact.
    #[inline]
    pub fn norm_sq(&self) -> i64 {
        self.norm_sq
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        (self.norm_sq as f64).sqrt()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.norm_sq == 0
    }

    #[inline]
    pub fn components(&self) -> [f64; 3] {
        [self.kx as f64, self.ky as f64, self.kz as f64]
    }

    /// Sup (Chebyshev) length, used by the cube truncation rule.
    pub fn sup_norm(&self) -> i32 {
        self.kx.abs().max(self.ky.abs()).max(self.kz.abs())
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.kx, -self.ky, -self.kz)
    }

    pub fn sub(&self, other: &WaveVector) -> Self {
        Self::new(self.kx - other.kx, self.ky - other.ky, self.kz - other.kz)
    }

    pub fn add(&self, other: &WaveVector) -> Self {
        Self::new(self.kx + other.kx, self.ky + other.ky, self.kz + other.kz)
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.kx, self.ky, self.kz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TruncationRule {
    /// kx² + ky² + kz² ≤ k_max²
    EuclideanBall,
    /// max(|kx|, |ky|, |kz|) ≤ k_max
    SupCube,
}

impl TruncationRule {
    pub fn name(&self) -> &'static str {
        match self {
            TruncationRule::EuclideanBall => "euclidean_ball",
            TruncationRule::SupCube => "sup_cube",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "euclidean_ball" => Some(TruncationRule::EuclideanBall),
            "sup_cube" => Some(TruncationRule::SupCube),
            _ => None,
        }
    }

    fn admits(&self, k: &WaveVector, k_max: u32) -> bool {
        match self {
            TruncationRule::EuclideanBall => k.norm_sq() <= (k_max as i64).pow(2),
            TruncationRule::SupCube => k.sup_norm() as u32 <= k_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    pub k_max: u32,
    pub truncation_rule: TruncationRule,
}

impl LatticeSpec {
    pub fn new(k_max: u32, truncation_rule: TruncationRule) -> Self {
        Self { k_max, truncation_rule }
    }

    pub fn ball(k_max: u32) -> Self {
        Self::new(k_max, TruncationRule::EuclideanBall)
    }

    pub fn cube(k_max: u32) -> Self {
        Self::new(k_max, TruncationRule::SupCube)
    }
}

/// Every nonzero site admitted by `spec`, in lexicographic `(kx, ky, kz)` order.
pub fn build_lattice(spec: &LatticeSpec) -> Result<Vec<WaveVector>> {
    if spec.k_max == 0 {
        return Err(Error::EmptyLattice);
    }
    let r = spec.k_max as i32;
    let mut sites = Vec::new();
    for kx in -r..=r {
        for ky in -r..=r {
            for kz in -r..=r {
                let k = WaveVector::new(kx, ky, kz);
                if !k.is_zero() && spec.truncation_rule.admits(&k, spec.k_max) {
                    sites.push(k);
                }
            }
        }
    }
    Ok(sites)
}

/// A built lattice: ordered sites, a dense index lookup and the convolution
/// pair table.
pub struct Lattice {
    spec: LatticeSpec,
    sites: Vec<WaveVector>,
    // Dense (2r+1)³ box; -1 marks sites outside the lattice (and the origin).
    lookup: Vec<i32>,
    // pairs[k] = (index of l, index of k - l), both nonzero and in the lattice.
    pairs: Vec<Vec<(u32, u32)>>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice").field("spec", &self.spec).field("sites", &self.sites.len()).finish()
    }
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Result<Arc<Self>> {
        let sites = build_lattice(&spec)?;
        let r = spec.k_max as i32;
        let side = (2 * r + 1) as usize;
        let mut lookup = vec![-1i32; side * side * side];
        for (i, k) in sites.iter().enumerate() {
            lookup[Self::box_offset(r, k)] = i as i32;
        }
        let mut lattice = Self { spec, sites, lookup, pairs: Vec::new() };
        lattice.pairs = lattice
            .sites
            .iter()
            .map(|k| {
                lattice
                    .sites
                    .iter()
                    .enumerate()
                    .filter_map(|(li, l)| lattice.index_of(&k.sub(l)).map(|kli| (li as u32, kli as u32)))
                    .collect()
            })
            .collect();
        Ok(Arc::new(lattice))
    }

    fn box_offset(r: i32, k: &WaveVector) -> usize {
        let side = 2 * r + 1;
        (((k.kx + r) * side + (k.ky + r)) * side + (k.kz + r)) as usize
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn sites(&self) -> &[WaveVector] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site(&self, index: usize) -> &WaveVector {
        &self.sites[index]
    }

    /// Position of `k` in the site ordering; `None` for the origin or any
    /// site outside the truncation.
    pub fn index_of(&self, k: &WaveVector) -> Option<usize> {
        let r = self.spec.k_max as i32;
        if k.kx.abs() > r || k.ky.abs() > r || k.kz.abs() > r {
            return None;
        }
        let i = self.lookup[Self::box_offset(r, k)];
        (i >= 0).then_some(i as usize)
    }

    pub fn pairs(&self, k_index: usize) -> &[(u32, u32)] {
        &self.pairs[k_index]
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.iter().map(Vec::len).sum()
    }

    /// Index of −k for every site.
    pub fn negation_map(&self) -> Vec<usize> {
        self.sites.iter().map(|k| self.index_of(&k.neg()).expect("lattice is closed under negation")).collect()
    }
}
