//! Accessibility and small-time local controllability of quadratic affine
//! control systems
//!
//! ```text
//! ẋ = Lx + Φ(x) + u₁f₁ + … + u_{n−k}f_{n−k}
//! ```
//!
//! where `Φ` is a cyclic homogeneous quadratic map and the control fields are
//! constant. The crate computes the subspace chain deciding strong
//! accessibility, runs a cascade of small-time local controllability rules
//! with checkable certificates, and cross-validates both against an exact
//! Lie-bracket oracle and a trajectory simulator.

pub mod chain;
pub mod lie;
pub mod linalg;
pub mod models;
pub mod report;
pub mod sim;
pub mod stlc;
pub mod system;
pub mod verdict;

pub use chain::{accessibility_verdict, kalman_rank, s_chain, ChainResult};
pub use linalg::{Mode, Number, Rational, Scalar, Subspace, Tolerance};
pub use system::{QuadraticSystem, SystemError, SystemSpec};
pub use verdict::{Certificate, Rule, Verdict, VerdictTag};
