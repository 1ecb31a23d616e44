//! Quantum protocols: fingerprint equality, untrusted state transfer and
//! the two compositions that replace a quantum player by a classical one.

mod compose;
mod eq_qq;
mod uqst;

pub use compose::{qrq_eq_run, rrq_eq_run, ComposedOutcome};
pub use eq_qq::{eq_qq_exact, eq_qq_run, EqQqOutcome};
pub use uqst::{
    uqst_alice, uqst_referee, uqst_run, RefereeTest, UqstOutcome, UqstParams, DESK_SCALE,
};
