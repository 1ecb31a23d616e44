use num_complex::Complex64;

use super::state::{check_dims, MixedEnsemble, StateVec};
use crate::error::{Error, Result};

/// Largest register dimension [`swap_test_circuit`] will simulate.
pub const MAX_CIRCUIT_DIM: usize = 64;

/// What the swap test compares the pure reference state against.
#[derive(Debug, Clone, Copy)]
pub enum SwapTarget<'a> {
    Pure(&'a StateVec),
    /// The marginal on one block of a mixture of product states.
    Block {
        ensemble: &'a MixedEnsemble,
        block: usize,
    },
}

/// Squared fidelity `<phi|rho|phi>` between a pure state and a target.
pub fn fidelity_sq(phi: &StateVec, target: SwapTarget<'_>) -> Result<f64> {
    match target {
        SwapTarget::Pure(psi) => Ok(phi.inner(psi)?.norm_sqr()),
        SwapTarget::Block { ensemble, block } => {
            let mut acc = 0.0;
            for (w, state) in ensemble.components() {
                let b = state.block(block).ok_or_else(|| {
                    Error::InvalidParameter(format!("ensemble has no block {block}"))
                })?;
                acc += w * phi.inner(b)?.norm_sqr();
            }
            Ok(acc)
        }
    }
}

/// Acceptance probability of the swap test: `1/2 + F^2/2`.
pub fn swap_test_prob(phi: &StateVec, target: SwapTarget<'_>) -> Result<f64> {
    Ok(0.5 + 0.5 * fidelity_sq(phi, target)?.min(1.0))
}

/// Acceptance probability by explicit simulation: ancilla in `|0>`,
/// Hadamard, controlled swap of the two registers, Hadamard, then the
/// probability of reading the ancilla as 0.
pub fn swap_test_circuit(phi: &StateVec, psi: &StateVec) -> Result<f64> {
    let d = phi.dim();
    check_dims(d, psi.dim())?;
    if d > MAX_CIRCUIT_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    let block = d * d;
    let zero = Complex64::new(0.0, 0.0);
    // Index layout: ancilla * d^2 + i * d + j.
    let mut state = vec![zero; 2 * block];
    for (i, a) in phi.amplitudes().iter().enumerate() {
        for (j, b) in psi.amplitudes().iter().enumerate() {
            state[i * d + j] = a * b;
        }
    }
    hadamard_on_ancilla(&mut state, block);
    for i in 0..d {
        for j in i + 1..d {
            state.swap(block + i * d + j, block + j * d + i);
        }
    }
    hadamard_on_ancilla(&mut state, block);
    Ok(state[..block].iter().map(|c| c.norm_sqr()).sum())
}

fn hadamard_on_ancilla(state: &mut [Complex64], block: usize) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (zero, one) = state.split_at_mut(block);
    for (a, b) in zero.iter_mut().zip(one.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = (x + y) * h;
        *b = (x - y) * h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RandomSource;
    use crate::quantum::state::ProductState;

    #[test]
    fn identical_and_orthogonal() {
        let mut rng = RandomSource::new(1, 0).rng();
        let phi = StateVec::random(5, &mut rng);
        assert!((swap_test_prob(&phi, SwapTarget::Pure(&phi)).unwrap() - 1.0).abs() < 1e-12);
        assert!((swap_test_circuit(&phi, &phi).unwrap() - 1.0).abs() < 1e-12);
        let e1 = StateVec::basis(4, 0);
        let e2 = StateVec::basis(4, 1);
        assert_eq!(swap_test_prob(&e1, SwapTarget::Pure(&e2)).unwrap(), 0.5);
        assert!((swap_test_circuit(&e1, &e2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn circuit_matches_closed_form() {
        let mut rng = RandomSource::new(2, 0).rng();
        for _ in 0..100 {
            let phi = StateVec::random(8, &mut rng);
            let psi = StateVec::random(8, &mut rng);
            let closed = swap_test_prob(&phi, SwapTarget::Pure(&psi)).unwrap();
            assert!((swap_test_circuit(&phi, &psi).unwrap() - closed).abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_target_averages_fidelities() {
        let e0 = StateVec::basis(2, 0);
        let e1 = StateVec::basis(2, 1);
        let ens = MixedEnsemble::new(vec![
            (0.25, ProductState::new(vec![e0.clone()])),
            (0.75, ProductState::new(vec![e1])),
        ])
        .unwrap();
        let p = swap_test_prob(&e0, SwapTarget::Block { ensemble: &ens, block: 0 }).unwrap();
        assert!((p - (0.5 + 0.125)).abs() < 1e-15);
        assert!(swap_test_prob(&e0, SwapTarget::Block { ensemble: &ens, block: 1 }).is_err());
    }

    #[test]
    fn errors_on_bad_dimensions() {
        let a = StateVec::basis(3, 0);
        let b = StateVec::basis(4, 0);
        assert!(swap_test_prob(&a, SwapTarget::Pure(&b)).is_err());
        assert!(swap_test_circuit(&a, &b).is_err());
        let big = StateVec::basis(65, 0);
        assert_eq!(swap_test_circuit(&big, &big), Err(Error::DimensionTooLarge(65)));
    }
}
