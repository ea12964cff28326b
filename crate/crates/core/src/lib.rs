//! Entanglement dynamics of three-qubit GHZ-type states under local Pauli
//! noise.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`]: small dense complex matrices and a Jacobi eigensolver.
//! * [`states`]: pure states, density matrices, partial traces, sampling.
//! * [`channels`]: Pauli channels in Kraus form and their three-qubit lifts.
//! * [`concurrence`]: the pure-state concurrence and the lower bound τ₃.
//! * [`analytic`]: closed forms for GHZ under one-, two- and three-sided noise.
//! * [`roof`]: numerical convex-roof estimation.
//! * [`harness`]: Monte-Carlo verification campaigns and parameter sweeps.

pub mod analytic;
pub mod channels;
pub mod concurrence;
pub mod error;
pub mod harness;
pub mod linalg;
mod par;
pub mod roof;
pub mod states;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
