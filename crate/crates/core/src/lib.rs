//! Weighted K-stability of polarized toric varieties from moment-polytope data.
//!
//! Exact rational geometry of moment polytopes, exact integration against the
//! lattice-normalized boundary measure, the weighted extremal affine function,
//! the toric weighted Mabuchi functional on convex piecewise-linear functions
//! with a linear-programming destabilizer search, and the toric weighted
//! volumes of filtrations.

pub mod affine;
pub mod error;
pub mod extremal;
pub mod filtration;
pub mod json;
pub mod linalg;
pub mod lp;
pub mod parallel;
pub mod plfunction;
pub mod polynomial;
pub mod polytope;
pub mod quadrature;
pub mod random;
pub mod rational;
pub mod stability;
pub mod triangulation;

pub use affine::AffineFunction;
pub use error::{Error, Result};
pub use parallel::ExecPolicy;
pub use plfunction::PLConvexFunction;
pub use polynomial::Polynomial;
pub use polytope::{Facet, Halfspace, PerturbationCut, Polytope};
pub use quadrature::{SmoothWeight, Value, Weight};
pub use rational::Q;
pub use triangulation::Triangulation;
