//! Global mild solutions of the incompressible Navier–Stokes equations in
//! weighted `L∞` spaces, on a periodic box standing in for `R^d`.
//!
//! The solver builds `u = e^{tΔ}u_0 - B(u, u)` by Picard iteration, where
//! `B(u,v)(t) = ∫_0^t e^{(t-τ)Δ} P ∇·(u ⊗ v) dτ`. The [`verify`] module turns
//! the linear and nonlinear decay estimates into pass/fail checks.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod kernels;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod verify;
pub mod weighted;

pub use error::{Error, Result};
pub use field::{ScalarField, TensorField, VectorField};
pub use fit::{CompositeReport, Criterion, DecayReport};
pub use grid::GridSpec;
pub use solver::{picard_solve, PicardDiagnostics, SolverConfig};
pub use weighted::{SpaceTimeField, WeightParams};
