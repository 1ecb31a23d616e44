//! Classical SMP protocols with sampled runners and exact evaluators.

mod disj;
mod eq_rr;
mod ne_rrr;
mod one_of_two;

use num_rational::Ratio;

pub use disj::{disj_rrr_run, disj_rrr_soundness_exact, distinct_hits, DisjExact, DisjParams};
pub use eq_rr::{eq_rr_exact, eq_rr_run, EqRrParams};
pub use ne_rrr::{ne_honest_message, ne_rrr_exact, ne_rrr_round_exact, ne_rrr_run, NeMerlinMsg, NeRrrParams};
pub use one_of_two::{one_out_of_two_exact, one_out_of_two_run, OneOutOfTwoParams};

/// Exact probabilities.
pub type Exact = Ratio<u128>;

pub fn exact_to_f64(r: &Exact) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
