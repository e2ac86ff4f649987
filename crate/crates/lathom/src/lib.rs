//! Pairwise-interaction lattice energies on perforated domains.
//!
//! The crate assembles discrete energies of the form
//! `sum_xi sum_alpha eps^d f(xi, D^xi_eps u(alpha))` for functions on the
//! grid `eps Z^d`, minimizes them under Dirichlet pins (periodic perforation
//! arrays, capacitary obstacle problems, affine boundary frames), and runs
//! the convergence studies that connect the discrete models to their
//! continuum limits: homogenized bulk densities from growing-cell minimum
//! problems, capacitary densities of small obstacles, and full constrained
//! minimum problems with a forcing term.
//!
//! The numerical core is generic over the floating-point scalar; `f64`
//! aliases are exported at the crate root and used by the CLI.

pub mod capacity;
pub mod continuum;
pub mod density;
pub mod energy;
pub mod error;
pub mod extrapolate;
pub mod geometry;
pub mod homogenization;
pub mod inequalities;
pub mod lattice;
pub mod scalar;
pub mod solver;
pub mod sum;

pub use error::{LathomError, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the core types.
pub type RealBox64 = geometry::RealBox<f64>;
pub type LatticeDomain64 = lattice::LatticeDomain<f64>;
pub type LatticeFunction64 = lattice::LatticeFunction<f64>;
pub type ConstraintSet64 = lattice::ConstraintSet<f64>;
pub type PerforationGeometry64 = lattice::PerforationGeometry<f64>;
pub type InteractionDensity64 = density::InteractionDensity<f64>;
pub type EnergySpec64 = energy::EnergySpec<f64>;
pub type SolveOptions64 = solver::SolveOptions<f64>;
pub type MinimizationResult64 = solver::MinimizationResult<f64>;
