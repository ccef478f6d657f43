//! Gaussian continuous-variable simulator for propagating quantum microwave
//! links.
//!
//! States are carried as a mean vector and covariance matrix in the
//! **vacuum-variance-1** convention: the vacuum has covariance `I`, a thermal
//! mode with mean occupation `n` has covariance `(2n + 1) I`. Quadratures are
//! interleaved per mode, `(x1, p1, x2, p2, ...)`.
//!
//! The crate is layered bottom-up:
//!
//! * [`gaussian`]: states, symplectic operations, entanglement and fidelity.
//! * [`thermal`]: Bose-Einstein occupation, thermal loss channels, segmented
//!   and continuous waveguides.
//! * [`link`] and [`atmosphere`]: Friis link budgets, aperture gains,
//!   tabulated atmospheric absorption.
//! * [`sensing`] and [`fock`]: quantum illumination exponents with a
//!   Fock-basis Chernoff oracle, and continuous-variable teleportation.
//! * [`scenario`]: config-driven pipelines, reports and reproduction tables.

pub mod atmosphere;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod link;
pub mod ode;
pub mod scenario;
pub mod sensing;
pub mod thermal;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, SymplecticOp};
