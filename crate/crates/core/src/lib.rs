//! Band/gap structure of one-dimensional periodic Schrödinger operators
//! `−ψ″ + V(x)ψ = λψ` and localized eigenvalues of operators glued from two
//! periodic half-line potentials (additive jumps and dislocations).
//!
//! The crate is organised bottom-up:
//!
//! * [`potential`]: even periodic potentials as cosine series.
//! * [`floquet`]: initial-value integration, monodromy, Prüfer angle.
//! * [`spectrum`]: Dirichlet/Neumann eigenvalues, band edges, gaps.
//! * [`bloch`]: decaying Bloch states and logarithmic-derivative ratios.
//! * [`interface`]: interface eigenvalue solvers and count predictions.
//! * [`fd_oracle`]: an independent finite-difference eigenvalue solver.

pub mod bloch;
pub mod error;
pub mod export;
pub mod fd_oracle;
pub mod floquet;
pub mod interface;
pub mod ode;
pub mod potential;
pub mod roots;
pub mod spectrum;
mod tolerances;

pub use error::{Error, Result};
pub use potential::{MonotonicityReport, PeriodicPotential, PotentialDescriptor};
pub use tolerances::Tolerances;
