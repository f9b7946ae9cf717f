//! Coordinate descent on convex quadratics.
//!
//! Gradient descent, cyclic coordinate descent (Gauss-Seidel), randomized
//! and randomly permuted coordinate descent for
//! `f(x) = xᵀAx − 2bᵀx`, together with the constant-off-diagonal worst-case
//! family `A_c`, its adversarial starting point, and every spectral-radius
//! and contraction-factor formula used to compare the methods.
//!
//! Modules are layered bottom-up:
//!
//! - [`linalg`]: dense eigen/spectrum kernels, triangular solves, Aberth
//!   root finding and the closed-form cosine sum.
//! - [`problems`]: problem construction (`A_c`, random `UᵀU` ensembles) and
//!   conditioning metrics.
//! - [`solvers`]: the epoch-structured iterative methods.
//! - [`analysis`]: iteration matrices, root machinery for `A_c`, bounds and
//!   iteration counts.
//! - [`harness`]: deterministic CSV producers behind the command-line tool.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use problems::QuadraticProblem;
pub use solvers::{Method, SolverConfig, StepsizeMode, Trajectory};
