//! Reduction of the nonlinear wave equation `□u = F(u)` in 1+3 dimensions
//! by the ansatz `u = φ(y, z)`.
//!
//! - [`expr`]: expressions, parsing, differentiation, jets, zero testing
//! - [`minkowski`]: four-vectors and parameter frames
//! - [`ansatz`]: reduction invariants, classification, the built-in catalog
//! - [`compat`]: necessary compatibility conditions of the canonical systems
//! - [`solvers`]: numerical and closed-form solutions of reduced equations
//! - [`lift`]: residuals of lifted solutions in four dimensions
//! - [`io`]: JSON formats

pub mod ansatz;
pub mod compat;
pub mod expr;
pub mod io;
pub mod lift;
pub mod minkowski;
pub mod solvers;
