//! Second-order nonlinear phase estimation with a coherent-state-fed
//! Mach-Zehnder interferometer read out by balanced homodyne detection.
//!
//! - [`analytic_model`]: closed-form quadrature moments, fringes, visibility.
//! - [`qfi`]: phase-averaged quantum Fisher information and the Cramer-Rao bound.
//! - [`fock_oracle`]: brute-force truncated Fock-space simulation.
//! - [`estimation`]: error-propagation sensitivity and operating-point search.

pub mod analytic_model;
pub mod error;
pub mod estimation;
pub mod fock_oracle;
pub mod qfi;
pub mod search;
pub mod types;

pub use error::{Error, Result};
pub use types::{LossPlacement, LossSpec, ProtocolParams, QuadratureMoments, SecondMomentForm};
