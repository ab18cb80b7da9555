//! Exact harmonic analysis on `F_q^d` for odd characteristic: field and
//! character tables, spheres, Fourier transforms, the counting function of
//! k-fold sums, the k-resultant magnitude set, and audits of the
//! inequalities that bound its size from below.

pub mod error;
pub mod exact;
pub mod field;
pub mod lattice;
pub mod magnitude;
pub mod restriction;
pub mod spectral;
pub mod tolerance;

pub use error::{Error, Result};
pub use field::{make_field, Field, Fq};
pub use lattice::{build_set, build_set_str, PointSet, SetSpec, Space};
