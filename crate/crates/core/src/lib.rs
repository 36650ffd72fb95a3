//! Gaussian-window phase estimation laboratory.
//!
//! * [`gaussian`]: discretized periodic Gaussians, tails, moments, aliasing,
//!   Lambert W_{-1}.
//! * [`planner`]: run parameters (M0, sigma~, q, K, M) and their predicates.
//! * [`sim`]: exact outcome distributions of the Gaussian phase-estimation
//!   circuit in the Hamiltonian eigenbasis, and seeded sampling.
//! * [`gsee`]: the sample-and-trim round, the Gaussian GSEE estimator and the
//!   majority-vote QPE baseline.
//! * [`bounds`]: exact-versus-analytic checks of every error bound.
//! * [`report`]: CSV/JSON emission helpers.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// frozen reference values keep all the digits they were printed with
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod bounds;
pub mod error;
pub mod exec;
pub mod gaussian;
pub mod gsee;
pub mod planner;
pub mod report;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use exec::Exec;
