//! Desk-scale simulation of pure states and the handful of quantum
//! operations the protocols use: fingerprints, swap tests, Haar-random
//! subspaces, projective measurements, quantised descriptions and
//! dephasing across registers.
//!
//! Trace distance is normalised to `[0, 1]` (half the trace norm)
//! throughout.

mod dephase;
mod quantize;
mod state;
mod store;
mod subspace;
mod swap;

use num_complex::Complex64;

use crate::codes::{encode, CodeSpec};
use crate::error::Result;
use crate::model::BitString;

pub use dephase::{
    dephase_across_blocks, dephase_computational, ensemble_outcome_probs, product_factors,
    product_outcome_probs, MAX_JOINT_DIM,
};
pub use quantize::{bits_for_target, dequantize, distance_bound, quantize, QuantizedState};
pub use state::{fidelity, trace_distance_pure, MixedEnsemble, ProductState, StateVec, NORM_TOL};
pub use store::StateStore;
pub use subspace::{haar_subspace, measure_subspace, project, Projection, Subspace, SURVIVAL_FLOOR};
pub use swap::{fidelity_sq, swap_test_circuit, swap_test_prob, SwapTarget, MAX_CIRCUIT_DIM};

/// Quantum fingerprint `N^{-1/2} sum_i |i>|C(x)_i>` of dimension `2N`,
/// with basis index `2i + C(x)_i`.
pub fn fingerprint(spec: &CodeSpec, x: &BitString) -> Result<StateVec> {
    let cw = encode(spec, x)?;
    Ok(fingerprint_of_codeword(&cw))
}

pub fn fingerprint_of_codeword(cw: &BitString) -> StateVec {
    let n = cw.len();
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * n];
    for (i, b) in cw.iter().enumerate() {
        amps[2 * i + b as usize] = amp;
    }
    StateVec::normalized(amps)
}
