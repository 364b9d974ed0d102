//! Mean time to equilibrium for Markov models.
//!
//! For a positive recurrent Markov process with stationary distribution
//! pi, the Kemeny function `K(x) = integral of E^x[T_z] pi(dz)` — the mean
//! time to reach a pi-random target — does not depend on the starting
//! point x. This crate computes K and its common value kappa for three
//! model classes and verifies the identities that surround the
//! constancy:
//!
//! - [`chain`]: finite discrete-time chains (exact linear algebra),
//! - [`ctmc`]: finite continuous-time chains (generator matrices),
//! - [`diffusion`]: one-dimensional regular diffusions (scale function,
//!   speed measure, Green function, and the metric identity
//!   kappa = gamma / 2),
//! - [`sim`]: seeded Monte Carlo oracles that re-estimate every
//!   deterministic quantity from sample paths.
//!
//! [`expr`] parses the coefficient expressions used by diffusion specs,
//! and [`quad`]/[`linalg`] carry the shared numerics.

pub mod chain;
pub mod ctmc;
pub mod diffusion;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod quad;
pub mod sim;

pub use chain::{KemenyReport, StationaryDistribution, TransitionMatrix};
pub use ctmc::{CtKemenyReport, GeneratorMatrix};
pub use diffusion::{Boundary, DiffusionAnalysis, DiffusionKemenyReport, DiffusionSpec};
pub use error::{Error, Result};
pub use expr::Expr;
pub use sim::{McEstimate, RngStream};
