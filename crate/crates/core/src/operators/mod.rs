//! Nonlinear machinery: Leray projection, the bilinear convolution, Duhamel
//! integration and the ⊛ product built from them.

pub mod bilinear;
pub mod duhamel;
pub mod identity;
pub mod leray;

pub use bilinear::bilinear;
pub use duhamel::{duhamel_all, duhamel_integrate, star_product, TimeGrid, TimeSlicedField};
pub use identity::{identity_split, IdentitySplit};
pub use leray::leray_project;
