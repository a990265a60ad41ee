//! Placement of isolated RAN function chains (RU, DU, CU) for network slices
//! on a multi-tier transport network.
//!
//! The crate builds the mixed-integer placement model as an explicit linear
//! IR, solves it with a structured branch-and-bound, runs a first-fit
//! baseline, and checks any placement against every model constraint.

pub mod error;
pub mod heuristic;
pub mod model;
pub mod mps;
pub mod exact;
pub mod experiment;
pub mod nf;
pub mod piecewise;
pub mod placement;
pub mod scenario;
pub mod topology;
pub mod validator;

pub use error::{Error, Result};
pub use nf::{NfType, PerNf};
