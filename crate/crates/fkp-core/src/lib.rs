//! Pseudospectral simulation and numerical-analysis toolkit for fractional
//! Kadomtsev-Petviashvili (fKP) equations.
//!
//! The crate evolves fKP-I/II under pure-power, ILW and Whitham-type
//! dispersion on a periodic box, monitors the conserved quantities (mass,
//! L2, Hamiltonian) and anisotropic norms, demonstrates the zero-mass
//! property of the free evolution with off-lattice oscillatory quadrature,
//! probes the resonance mechanism behind the quasilinear (non-C2) behaviour
//! of the flow map, and checks the functional inequalities and critical
//! exponents attached to the scaling structure of the equation.

pub mod constraint;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod inequalities;
pub mod io;
pub mod norms;
pub mod ops;
pub mod quad;
pub mod resonance;
pub mod symbols;

pub use error::FkpError;
pub use field::{Field, SpaceTag};
pub use grid::Grid2D;
pub use symbols::{KPSymbol, Kappa, SymbolFamily};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, FkpError>;
