//! Simulation of simultaneous-message-passing protocols with an untrusted
//! prover: code-grid protocols for equality and its relatives, quantum
//! fingerprints, untrusted quantum state transfer, and a finite-field
//! disjointness protocol, plus the harness that measures them.

pub mod adversaries;
pub mod classical;
pub mod codes;
pub mod error;
pub mod field;
pub mod harness;
pub mod model;
pub mod qprotocols;
pub mod quantum;
pub mod verify;

pub use error::{Error, Result};
