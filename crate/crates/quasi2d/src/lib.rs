//! Numerical laboratory for operator constructions on finite lattice truncations:
//! flux unitaries and their spectral decompositions, commutator-based locality
//! classes, block Fredholm indices computed by two independent routes, and
//! explicit certified homotopy paths between operators in the same class.

pub mod arc;
pub mod config;
pub mod contour;
pub mod error;
pub mod factory;
pub mod family;
pub mod geometry;
pub mod homotopy;
pub mod index;
pub mod linalg;
pub mod locality;
pub mod linop;
pub mod plot;
pub mod runner;
pub mod star;
pub mod tol;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
