//! Solver for linear and nonlinear fractional-order differential equations.
//!
//! The trial solution is a functional-link network: a weighted sum of
//! Fibonacci polynomials N(x) = sum_i w_i F_i(x). Caputo derivatives of the
//! basis have closed forms, so the residual of
//!
//! ```text
//! D^am y = f(x, y, D^a1 y, .., D^a(m-1) y),   y^(k)(0) = y0k
//! ```
//!
//! and its exact weight jacobian are cheap to evaluate on a set of training
//! points once the basis values are cached. Training minimizes mean squared
//! residual plus squared initial condition error with a damped least-squares
//! loop; on the benchmark problems the learned weights recover polynomial
//! solutions to near machine precision.
//!
//! Module layout:
//! - [`basis`]: gamma function, Fibonacci polynomials, Caputo closed forms
//! - [`expr`]: the right-hand-side expression language
//! - [`model`]: the network and its precomputed basis value cache
//! - [`loss`]: problem specification and the least-squares objective
//! - [`optimizer`]: the damped training loop
//! - [`problems`]: built-in benchmarks, problem files, error tables
//!
//! With the default `parallel` feature, per-point work (basis cache
//! construction, residual and jacobian rows) fans out across threads;
//! reductions stay sequential in point order, so results are bit-identical
//! with the feature disabled.

pub mod basis;
mod error;
pub mod expr;
pub mod loss;
pub mod model;
pub mod optimizer;
pub mod problems;

pub use error::{Error, Result};
