//! Exact computer algebra for curved A-infinity algebras over a Novikov-type
//! coefficient ring: tensor-word operators, Hochschild and cyclic complexes,
//! their homology, and open-closed chain maps into a target complex.

pub mod ainfty;
pub mod complexes;
pub mod format;
pub mod family;
pub mod graded;
pub mod homology;
pub mod linalg;
pub mod openclosed;
pub mod scalars;
pub mod signs;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
