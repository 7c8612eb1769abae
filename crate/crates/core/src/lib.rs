//! Hilbert-Schmidt volume ratios of bipartite quantum states.
//!
//! Estimates the fraction of states with positive partial transpose and the
//! fraction of two-qubit states violating CHSH or Collins-Gisin inequalities,
//! using Muller multiphase Monte Carlo and hit-and-run walks.

pub mod error;
pub mod estimation;
pub mod matrix;
pub mod operator_basis;
pub mod partial_transpose;
pub mod positivity;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use estimation::{Method, PhaseHits, RatioEstimate};
pub use matrix::HermitianMatrix;
pub use operator_basis::{make_family, make_family_by_name, CoordinateVector, FamilyName, StateFamily};
pub use rng::RngStream;
pub use samplers::{Predicate, StatePredicate};
