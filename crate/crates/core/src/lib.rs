//! Double-slit interference from real-valued path fields.
//!
//! Densities, phases, currents and averaged trajectories are computed from
//! classical closed forms: spreading Gaussians with a ballistic diffusivity,
//! osmotic and convective velocity fields per slit, and an averaged
//! interference rule. The [`oracle`] module evaluates the same observables
//! from complex free-particle wavefunctions so the two routes can be checked
//! against each other.
//!
//! ```
//! use subquantum::{dynamics, oracle, SlitConfig};
//!
//! let cfg = SlitConfig::default();
//! let (x, t) = (1.3, 2.5);
//! let classical = dynamics::total_current(&cfg, x, t);
//! let quantum = oracle::quantum_current(&cfg, x, t);
//! assert!((classical - quantum).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cml;
pub mod dispersion;
pub mod dynamics;
mod error;
pub mod fields;
pub mod interference;
pub mod oracle;
pub mod params;

pub use error::{Error, Result};
pub use fields::{Grid, ScalarField};
pub use params::{PhysicalParams, Slit, SlitConfig};
