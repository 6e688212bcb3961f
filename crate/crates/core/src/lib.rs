//! Collective pure dephasing of `n` decoupled spin qubits, each coupled to its
//! own nuclear-spin bath.
//!
//! A superposition of spin product states dephases because every pair of
//! basis states picks up a random relative phase from the local longitudinal
//! Overhauser fields. The ensemble-averaged fidelity depends only on the
//! basis populations and on how many spins differ within each pair, so the
//! whole problem reduces to a histogram of pair distances.
//!
//! * [`states`]: product and superposed states, canonical state classes.
//! * [`dephasing`]: pair statistics, decay kernels, exact fidelity curves and
//!   the scaling ratio `T(n)/T(1)` (analytic, fitted and closed-form).
//! * [`ensembles`]: seeded random-state families and deviation statistics.
//! * [`oracle`]: semiclassical Monte-Carlo and brute-force cross-checks.

pub mod dephasing;
pub mod ensembles;
mod error;
pub mod oracle;
pub mod states;

pub use error::{Error, Result};
