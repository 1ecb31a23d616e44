//! Removing entanglement between two registers without changing the
//! statistics of local measurements.
//!
//! Writing the joint state's density matrix in a product basis and zeroing
//! every off-diagonal entry leaves a mixture of product basis states. Any
//! product measurement that is diagonal in that basis (in particular the
//! `{V, I - V}` measurements when the local bases are adapted to `V`) sees
//! exactly the same outcome distribution on both.

use num_complex::Complex64;

use super::state::{check_dims, norm, MixedEnsemble, ProductState, StateVec};
use super::subspace::Subspace;
use crate::error::{Error, Result};

pub const MAX_JOINT_DIM: usize = 64;

/// Below this weight a product basis term is dropped from the ensemble.
const WEIGHT_FLOOR: f64 = 1e-18;

/// Dephases `joint` (dimension `d1 * d2`, second register as the fast index)
/// in the product basis formed by the full-rank local bases `basis_a` and
/// `basis_b`. Product inputs come back unchanged as a single component.
pub fn dephase_across_blocks(
    joint: &StateVec,
    d1: usize,
    d2: usize,
    basis_a: &Subspace,
    basis_b: &Subspace,
) -> Result<MixedEnsemble> {
    check_joint(joint, d1, d2)?;
    for (basis, d) in [(basis_a, d1), (basis_b, d2)] {
        if basis.ambient_dim() != d || basis.dim() != d {
            return Err(Error::InvalidParameter(format!(
                "local basis must span all of C^{d}"
            )));
        }
    }
    if let Some((u, w)) = product_factors(joint, d1, d2) {
        return Ok(MixedEnsemble::pure(ProductState::new(vec![u, w])));
    }
    let amps = joint.amplitudes();
    let mut components = Vec::new();
    for u in basis_a.basis() {
        for w in basis_b.basis() {
            // <u ⊗ w | joint>
            let mut c = Complex64::new(0.0, 0.0);
            for i in 0..d1 {
                for j in 0..d2 {
                    c += (u[i] * w[j]).conj() * amps[i * d2 + j];
                }
            }
            let weight = c.norm_sqr();
            if weight > WEIGHT_FLOOR {
                let block_a = StateVec::normalized(u.clone());
                let block_b = StateVec::normalized(w.clone());
                components.push((weight, ProductState::new(vec![block_a, block_b])));
            }
        }
    }
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    for (w, _) in components.iter_mut() {
        *w /= total;
    }
    MixedEnsemble::new(components)
}

/// Dephasing in the computational product basis.
pub fn dephase_computational(joint: &StateVec, d1: usize, d2: usize) -> Result<MixedEnsemble> {
    dephase_across_blocks(
        joint,
        d1,
        d2,
        &Subspace::coordinate(d1, d1)?,
        &Subspace::coordinate(d2, d2)?,
    )
}

/// Splits a product state into its two factors, or `None` if entangled.
pub fn product_factors(joint: &StateVec, d1: usize, d2: usize) -> Option<(StateVec, StateVec)> {
    let amps = joint.amplitudes();
    let (mut bi, mut bj) = (0, 0);
    let mut best = -1.0;
    for i in 0..d1 {
        for j in 0..d2 {
            let m = amps[i * d2 + j].norm_sqr();
            if m > best {
                best = m;
                bi = i;
                bj = j;
            }
        }
    }
    // Rank one means amps[i][j] * amps[bi][bj] == amps[i][bj] * amps[bi][j].
    let pivot = amps[bi * d2 + bj];
    for i in 0..d1 {
        for j in 0..d2 {
            let lhs = amps[i * d2 + j] * pivot;
            let rhs = amps[i * d2 + bj] * amps[bi * d2 + j];
            if (lhs - rhs).norm() > 1e-12 {
                return None;
            }
        }
    }
    let u: Vec<Complex64> = (0..d1).map(|i| amps[i * d2 + bj]).collect();
    let w: Vec<Complex64> = (0..d2).map(|j| amps[bi * d2 + j]).collect();
    Some((StateVec::normalized(u), StateVec::normalized(w)))
}

/// Outcome probabilities of measuring `{P, I-P}` on the first register and
/// `{Q, I-Q}` on the second, ordered (in,in), (in,out), (out,in), (out,out).
pub fn product_outcome_probs(
    joint: &StateVec,
    d1: usize,
    d2: usize,
    p: &Subspace,
    q: &Subspace,
) -> Result<[f64; 4]> {
    check_joint(joint, d1, d2)?;
    check_dims(p.ambient_dim(), d1)?;
    check_dims(q.ambient_dim(), d2)?;
    let amps = joint.amplitudes();
    // Apply the second-register projector row by row.
    let mut q_in = vec![Complex64::new(0.0, 0.0); d1 * d2];
    for i in 0..d1 {
        let row = &amps[i * d2..(i + 1) * d2];
        let proj = q.project_vec(row)?;
        q_in[i * d2..(i + 1) * d2].copy_from_slice(&proj);
    }
    let q_out: Vec<Complex64> = amps.iter().zip(&q_in).map(|(a, b)| a - b).collect();
    let apply_p = |v: &[Complex64]| -> Result<(f64, f64)> {
        let mut inside = 0.0;
        let mut total = 0.0;
        for j in 0..d2 {
            let col: Vec<Complex64> = (0..d1).map(|i| v[i * d2 + j]).collect();
            inside += norm(&p.project_vec(&col)?).powi(2);
            total += norm(&col).powi(2);
        }
        Ok((inside, total - inside))
    };
    let (ii, oi) = apply_p(&q_in)?;
    let (io, oo) = apply_p(&q_out)?;
    Ok([ii, io, oi, oo])
}

/// The same outcome probabilities for a two-block product ensemble.
pub fn ensemble_outcome_probs(ens: &MixedEnsemble, p: &Subspace, q: &Subspace) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (w, state) in ens.components() {
        let blocks: Vec<&StateVec> = state.blocks().collect();
        let [u, v] = blocks.as_slice() else {
            return Err(Error::InvalidParameter("ensemble components must have two blocks".into()));
        };
        let pu = survival(p, u)?;
        let qv = survival(q, v)?;
        out[0] += w * pu * qv;
        out[1] += w * pu * (1.0 - qv);
        out[2] += w * (1.0 - pu) * qv;
        out[3] += w * (1.0 - pu) * (1.0 - qv);
    }
    Ok(out)
}

fn survival(v: &Subspace, s: &StateVec) -> Result<f64> {
    check_dims(v.ambient_dim(), s.dim())?;
    Ok(v.coords_of(s.amplitudes()).iter().map(|c| c.norm_sqr()).sum())
}

fn check_joint(joint: &StateVec, d1: usize, d2: usize) -> Result<()> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidParameter("empty register".into()));
    }
    if d1 * d2 > MAX_JOINT_DIM {
        return Err(Error::DimensionTooLarge(d1 * d2));
    }
    check_dims(d1 * d2, joint.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RandomSource;
    use crate::quantum::subspace::haar_subspace;
    use rand::Rng;

    /// Dense density matrix, used only as an independent oracle.
    struct Density {
        d: usize,
        m: Vec<Complex64>,
    }

    impl Density {
        fn pure(s: &[Complex64]) -> Self {
            let d = s.len();
            let mut m = vec![Complex64::new(0.0, 0.0); d * d];
            for i in 0..d {
                for j in 0..d {
                    m[i * d + j] = s[i] * s[j].conj();
                }
            }
            Density { d, m }
        }

        fn from_ensemble(ens: &MixedEnsemble) -> Self {
            let mut acc: Option<Density> = None;
            for (w, st) in ens.components() {
                let joint = st.block(0).unwrap().tensor(st.block(1).unwrap());
                let rho = Density::pure(joint.amplitudes());
                match acc.as_mut() {
                    None => {
                        acc = Some(Density {
                            d: rho.d,
                            m: rho.m.iter().map(|x| x * w).collect(),
                        })
                    }
                    Some(a) => a.m.iter_mut().zip(&rho.m).for_each(|(x, y)| *x += y * w),
                }
            }
            acc.unwrap()
        }

        /// Tr[(P ⊗ Q) rho] for projectors given as dense matrices.
        fn expect(&self, op: &[Complex64]) -> f64 {
            let d = self.d;
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..d {
                for k in 0..d {
                    tr += op[i * d + k] * self.m[k * d + i];
                }
            }
            tr.re
        }
    }

    fn projector(v: &Subspace) -> Vec<Complex64> {
        let d = v.ambient_dim();
        let mut m = vec![Complex64::new(0.0, 0.0); d * d];
        for b in v.basis() {
            for i in 0..d {
                for j in 0..d {
                    m[i * d + j] += b[i] * b[j].conj();
                }
            }
        }
        m
    }

    fn kron(a: &[Complex64], da: usize, b: &[Complex64], db: usize) -> Vec<Complex64> {
        let d = da * db;
        let mut m = vec![Complex64::new(0.0, 0.0); d * d];
        for i1 in 0..da {
            for j1 in 0..da {
                for i2 in 0..db {
                    for j2 in 0..db {
                        m[(i1 * db + i2) * d + (j1 * db + j2)] = a[i1 * da + j1] * b[i2 * db + j2];
                    }
                }
            }
        }
        m
    }

    fn complement(p: &[Complex64], d: usize) -> Vec<Complex64> {
        (0..d * d)
            .map(|k| {
                let id = if k / d == k % d { 1.0 } else { 0.0 };
                Complex64::new(id, 0.0) - p[k]
            })
            .collect()
    }

    fn density_stats(rho: &Density, p: &Subspace, q: &Subspace) -> [f64; 4] {
        let (d1, d2) = (p.ambient_dim(), q.ambient_dim());
        let pm = projector(p);
        let qm = projector(q);
        let pc = complement(&pm, d1);
        let qc = complement(&qm, d2);
        [
            rho.expect(&kron(&pm, d1, &qm, d2)),
            rho.expect(&kron(&pm, d1, &qc, d2)),
            rho.expect(&kron(&pc, d1, &qm, d2)),
            rho.expect(&kron(&pc, d1, &qc, d2)),
        ]
    }

    /// Random projector with its full adapted basis.
    fn adapted<R: Rng>(d: usize, rng: &mut R) -> (Subspace, Subspace) {
        let full = haar_subspace(d, d, rng).unwrap();
        let rank = rng.random_range(1..d);
        let p = Subspace::from_columns(d, full.basis()[..rank].to_vec()).unwrap();
        (p, full)
    }

    #[test]
    fn product_input_is_returned_as_is() {
        let mut rng = RandomSource::new(1, 0).rng();
        let u = StateVec::random(3, &mut rng);
        let w = StateVec::random(3, &mut rng);
        let ens = dephase_computational(&u.tensor(&w), 3, 3).unwrap();
        assert_eq!(ens.components().len(), 1);
        let (wt, st) = &ens.components()[0];
        assert_eq!(*wt, 1.0);
        assert!((st.block(0).unwrap().inner(&u).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!((st.block(1).unwrap().inner(&w).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_becomes_classical_mixture() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let bell = StateVec::new(vec![Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)]).unwrap();
        let ens = dephase_computational(&bell, 2, 2).unwrap();
        assert_eq!(ens.components().len(), 2);
        for (w, st) in ens.components() {
            assert!((w - 0.5).abs() < 1e-15);
            let joint = st.block(0).unwrap().tensor(st.block(1).unwrap());
            let a = joint.amplitudes();
            assert!(a[0].norm() > 0.99 || a[3].norm() > 0.99);
        }
        let z0 = Subspace::coordinate(2, 1).unwrap();
        let from_ens = ensemble_outcome_probs(&ens, &z0, &z0).unwrap();
        let oracle = density_stats(&Density::pure(bell.amplitudes()), &z0, &z0);
        for k in 0..4 {
            assert!((from_ens[k] - oracle[k]).abs() < 1e-12);
        }
        assert!((oracle[0] - 0.5).abs() < 1e-12 && (oracle[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_joint_states_keep_product_statistics() {
        let mut rng = RandomSource::new(2, 0).rng();
        for _ in 0..100 {
            let joint = StateVec::random(9, &mut rng);
            let rho = Density::pure(joint.amplitudes());
            for _ in 0..20 {
                let (p, pa) = adapted(3, &mut rng);
                let (q, qa) = adapted(3, &mut rng);
                let ens = dephase_across_blocks(&joint, 3, 3, &pa, &qa).unwrap();
                let dephased = density_stats(&Density::from_ensemble(&ens), &p, &q);
                let original = density_stats(&rho, &p, &q);
                let direct = product_outcome_probs(&joint, 3, 3, &p, &q).unwrap();
                let fast = ensemble_outcome_probs(&ens, &p, &q).unwrap();
                for k in 0..4 {
                    assert!((dephased[k] - original[k]).abs() < 1e-9);
                    assert!((direct[k] - original[k]).abs() < 1e-9);
                    assert!((fast[k] - original[k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn refuses_large_joint_dimension() {
        let s = StateVec::basis(81, 0);
        assert_eq!(dephase_computational(&s, 9, 9).unwrap_err(), Error::DimensionTooLarge(81));
    }
}
