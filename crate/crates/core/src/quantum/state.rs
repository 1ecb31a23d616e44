use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;

/// A pure state: a unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec {
    amps: Vec<Complex64>,
}

impl StateVec {
    /// Wraps amplitudes that are already normalised.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("zero-dimensional state".into()));
        }
        let norm = norm(&amps);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("state has norm {norm}")));
        }
        Ok(StateVec::normalized(amps))
    }

    /// Scales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Self {
        let n = norm(&amps);
        assert!(n > 0.0, "cannot normalise the zero vector");
        for a in amps.iter_mut() {
            *a /= n;
        }
        StateVec { amps }
    }

    pub fn try_normalized(amps: Vec<Complex64>) -> Result<Self> {
        if norm(&amps) < 1e-300 || amps.is_empty() {
            return Err(Error::InvalidParameter("cannot normalise the zero vector".into()));
        }
        Ok(StateVec::normalized(amps))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        StateVec { amps }
    }

    /// Uniformly (Haar) random pure state.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        StateVec::normalized(gaussian_vector(dim, rng))
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVec) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(inner(&self.amps, &other.amps))
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `|self> ⊗ |other>`, with `other` as the fast index.
    pub fn tensor(&self, other: &StateVec) -> StateVec {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVec { amps }
    }
}

impl Serialize for StateVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amps.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let amps = pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        StateVec::new(amps).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(a, b));
    }
    Ok(())
}

/// Vector of independent standard complex Gaussians, `E|z|^2 = 1`.
pub(crate) fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect()
}

/// `|<phi|psi>|`.
pub fn fidelity(phi: &StateVec, psi: &StateVec) -> Result<f64> {
    Ok(phi.inner(psi)?.norm().min(1.0))
}

/// Half the trace norm of `|phi><phi| - |psi><psi|`, i.e. `sqrt(1 - F^2)`,
/// computed as the length of the part of `psi` orthogonal to `phi`.
pub fn trace_distance_pure(phi: &StateVec, psi: &StateVec) -> Result<f64> {
    if phi == psi {
        return Ok(0.0);
    }
    let c = phi.inner(psi)?;
    let residual: f64 = psi
        .amps
        .iter()
        .zip(&phi.amps)
        .map(|(q, p)| (q - c * p).norm_sqr())
        .sum();
    Ok(residual.sqrt().min(1.0))
}

/// Tensor product of pure blocks, one per register, stored as runs of
/// identical consecutive blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    runs: Vec<(StateVec, usize)>,
}

impl ProductState {
    pub fn new(blocks: Vec<StateVec>) -> Self {
        let mut runs: Vec<(StateVec, usize)> = Vec::new();
        for b in blocks {
            match runs.last_mut() {
                Some((prev, count)) if *prev == b => *count += 1,
                _ => runs.push((b, 1)),
            }
        }
        ProductState { runs }
    }

    pub fn copies(state: &StateVec, count: usize) -> Self {
        let runs = if count == 0 { vec![] } else { vec![(state.clone(), count)] };
        ProductState { runs }
    }

    pub fn len(&self) -> usize {
        self.runs.iter().map(|(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// `(state, multiplicity)` for each maximal run of equal blocks.
    pub fn runs(&self) -> &[(StateVec, usize)] {
        &self.runs
    }

    pub fn block(&self, index: usize) -> Option<&StateVec> {
        let mut start = 0;
        for (s, c) in &self.runs {
            if index < start + c {
                return Some(s);
            }
            start += c;
        }
        None
    }

    pub fn blocks(&self) -> impl Iterator<Item = &StateVec> + '_ {
        self.runs.iter().flat_map(|(s, c)| std::iter::repeat_n(s, *c))
    }

    /// Run index of every block, in block order.
    pub fn run_of_block(&self) -> Vec<usize> {
        self.runs
            .iter()
            .enumerate()
            .flat_map(|(r, (_, c))| std::iter::repeat_n(r, *c))
            .collect()
    }
}

/// A classical mixture of product states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedEnsemble {
    components: Vec<(f64, ProductState)>,
}

impl MixedEnsemble {
    pub fn new(components: Vec<(f64, ProductState)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("empty ensemble".into()));
        }
        if components.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter("negative ensemble weight".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("ensemble weights sum to {total}")));
        }
        Ok(MixedEnsemble { components })
    }

    pub fn pure(state: ProductState) -> Self {
        MixedEnsemble {
            components: vec![(1.0, state)],
        }
    }

    pub fn components(&self) -> &[(f64, ProductState)] {
        &self.components
    }

    /// Draws one component according to the weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &ProductState {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (w, s) in &self.components {
            acc += w;
            if u < acc {
                return s;
            }
        }
        &self.components.last().expect("non-empty").1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RandomSource;

    #[test]
    fn random_states_are_unit_norm() {
        let mut rng = RandomSource::new(1, 0).rng();
        for d in 1..20 {
            let s = StateVec::random(d, &mut rng);
            assert!((s.norm() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn distance_and_fidelity_extremes() {
        let a = StateVec::basis(4, 0);
        let b = StateVec::basis(4, 1);
        assert_eq!(trace_distance_pure(&a, &a).unwrap(), 0.0);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(trace_distance_pure(&a, &b).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        assert!(fidelity(&a, &StateVec::basis(3, 0)).is_err());
    }

    #[test]
    fn fuchs_van_de_graaf_chain() {
        let mut rng = RandomSource::new(2, 0).rng();
        for _ in 0..500 {
            let d = 2 + (rand::Rng::random_range(&mut rng, 0..10));
            let a = StateVec::random(d, &mut rng);
            let b = StateVec::random(d, &mut rng);
            let f = fidelity(&a, &b).unwrap();
            let t = trace_distance_pure(&a, &b).unwrap();
            assert!(1.0 - f <= t + 1e-12);
            assert!(t <= (1.0 - f * f).sqrt() + 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rng = RandomSource::new(3, 0).rng();
        let s = StateVec::random(5, &mut rng);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with("[["));
        let back: StateVec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.amplitudes().len(), 5);
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn ensemble_weights_are_validated() {
        let p = ProductState::copies(&StateVec::basis(2, 0), 2);
        assert!(MixedEnsemble::new(vec![(0.5, p.clone()), (0.4, p.clone())]).is_err());
        assert!(MixedEnsemble::new(vec![(-0.5, p.clone()), (1.5, p.clone())]).is_err());
        assert!(MixedEnsemble::new(vec![(0.25, p.clone()), (0.75, p)]).is_ok());
    }
}
