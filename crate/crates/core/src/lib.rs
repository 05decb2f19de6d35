//! Symmetrized p-convexity toolkit.
//!
//! * [`expr`] parses and evaluates user-supplied functions of `x`.
//! * [`meanspace`] holds p-power means, the p-reflection of an interval and the
//!   (anti) p-symmetrical transforms.
//! * [`integrate`] is the quadrature backend: adaptive Gauss–Kronrod, the
//!   left/right fractional integrals and the Gamma function.
//! * [`analysis`] decides p-convexity, symmetrized p-convexity and weight
//!   symmetry on a refined grid, returning counterexample witnesses.
//! * [`inequalities`] evaluates every Hermite–Hadamard / Fejér chain as numbers
//!   with margins.
//! * [`report`], [`corpus`] and [`cli`] serialize results and drive the command
//!   line front end.

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod inequalities;
pub mod integrate;
pub mod meanspace;
pub mod report;

pub use error::{Error, Result};
pub use expr::{FuncExpr, ParamBindings, Univariate};
pub use meanspace::{Interval, PParam};
