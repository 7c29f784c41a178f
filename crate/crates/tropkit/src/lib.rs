//! Exact max-plus and related semiring algebra: matrices, spectral theory,
//! projectors and separation, two-sided systems, determinant-like invariants,
//! Plücker/TP functions, assignment duality and traffic dynamics.

pub mod assign;
pub mod determ;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod plucker;
pub mod projector;
pub mod semiring;
pub mod spectral;
pub mod tropmat;
pub mod twosided;

pub use error::{Result, TropError};
pub use semiring::{Ext, Rat, SemiringTag, TropScalar};
pub use tropmat::{TropMatrix, TropVector};
