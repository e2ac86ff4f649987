//! Lattice domains, functions, perforation masks, constraints, and the
//! operators linking lattice and continuum descriptions.

pub mod constraints;
pub mod domain;
pub mod function;
pub mod interp;
pub mod io;
pub mod perforation;

pub use constraints::{boundary_frame, ConstraintSet};
pub use domain::{LatticeDomain, DEFAULT_SITE_BUDGET};
pub use function::{offset_norm, LatticeFunction};
pub use interp::{cell_average_sample, truncate_values, AffineInterpolant2d, Simplex};
pub use perforation::PerforationGeometry;
