//! Independent brute-force oracles used to validate the Gaussian engine and
//! the two simulation pipelines on small instances.

pub mod equivalence;
pub mod majorana;
pub mod qubit;

pub use majorana::DenseMajorana;
pub use qubit::DenseState;
