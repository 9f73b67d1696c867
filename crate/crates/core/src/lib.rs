//! Entangled flux allocation for flex-grid entanglement distribution networks.
//!
//! The crate is layered bottom-up:
//!
//! * [`state`]: two-qubit density matrices, fidelity and log-negativity.
//! * [`link`]: coincidence rates and per-link fidelity / EBR, dimensioned and
//!   dimensionless.
//! * [`analysis`]: closed-form and searched optima of a single link.
//! * [`optimizer`]: allocation encoding, the network fitness, a genetic
//!   algorithm and an exhaustive oracle.
//! * [`scenario`]: scenario files, built-in presets, sweep driver and reports.

pub mod analysis;
pub mod link;
pub mod optimizer;
pub mod scenario;
pub mod search;
pub mod state;
