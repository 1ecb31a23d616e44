use num_complex::Complex64;
use rand::Rng;

use super::state::{check_dims, gaussian_vector, inner, norm, StateVec};
use crate::error::{Error, Result};

/// Below this squared length a projection is treated as zero.
pub const SURVIVAL_FLOOR: f64 = 1e-15;

/// An `a`-dimensional subspace of `C^n`, given by a fixed orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Complex64>>,
}

impl Subspace {
    /// Orthonormalises the given vectors (in order) and keeps the result
    /// as the fixed basis.
    pub fn from_columns(ambient: usize, columns: Vec<Vec<Complex64>>) -> Result<Self> {
        if columns.is_empty() || columns.len() > ambient {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {} not in 1..={ambient}",
                columns.len()
            )));
        }
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(columns.len());
        for mut v in columns {
            check_dims(ambient, v.len())?;
            // Two Gram-Schmidt passes keep the basis orthonormal to ~1e-15.
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(b, &v);
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= c * bi;
                    }
                }
            }
            let nv = norm(&v);
            if nv < 1e-10 {
                return Err(Error::InvalidParameter("columns are linearly dependent".into()));
            }
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
        Ok(Subspace { ambient, basis })
    }

    /// The span of the first `a` standard basis vectors.
    pub fn coordinate(ambient: usize, a: usize) -> Result<Self> {
        let cols = (0..a)
            .map(|k| StateVec::basis(ambient, k).amplitudes().to_vec())
            .collect();
        Subspace::from_columns(ambient, cols)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.basis.iter().enumerate() {
            for (j, v) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner(u, v) - target).norm());
            }
        }
        worst
    }

    /// Coordinates `<b_k|v>` of `v` in the fixed basis.
    pub fn coords_of(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.basis.iter().map(|b| inner(b, v)).collect()
    }

    /// The ambient vector `sum_k c_k b_k`.
    pub fn embed(&self, coords: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dims(self.dim(), coords.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.ambient];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        Ok(out)
    }

    /// Unnormalised projection of `v` onto the subspace.
    pub fn project_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dims(self.ambient, v.len())?;
        self.embed(&self.coords_of(v))
    }
}

/// Orthonormalised `n x a` matrix of independent standard complex
/// Gaussians; its column span is Haar distributed.
pub fn haar_subspace<R: Rng + ?Sized>(n: usize, a: usize, rng: &mut R) -> Result<Subspace> {
    if a == 0 || a > n {
        return Err(Error::InvalidParameter(format!("need 1 <= a <= n, got a = {a}, n = {n}")));
    }
    loop {
        let cols = (0..a).map(|_| gaussian_vector(n, rng)).collect();
        // Degenerate Gaussian draws have probability zero; redraw if one occurs.
        if let Ok(s) = Subspace::from_columns(n, cols) {
            return Ok(s);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Squared length of the projection, in `[0, 1]`.
    pub survival: f64,
    /// Normalised coordinates in the subspace basis; `None` when the
    /// projection is numerically zero.
    pub coords: Option<StateVec>,
}

pub fn project(phi: &StateVec, v: &Subspace) -> Result<Projection> {
    check_dims(v.ambient, phi.dim())?;
    let coords = v.coords_of(phi.amplitudes());
    let survival = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().clamp(0.0, 1.0);
    let coords = if survival < SURVIVAL_FLOOR {
        None
    } else {
        Some(StateVec::normalized(coords))
    };
    Ok(Projection { survival, coords })
}

/// Measures `{V, I - V}`: returns whether the state landed in `V` and the
/// renormalised post-measurement state in the ambient space.
pub fn measure_subspace<R: Rng + ?Sized>(
    phi: &StateVec,
    v: &Subspace,
    rng: &mut R,
) -> Result<(bool, StateVec)> {
    let inside = v.project_vec(phi.amplitudes())?;
    let survival = norm(&inside).powi(2).clamp(0.0, 1.0);
    let outside: Vec<Complex64> = phi
        .amplitudes()
        .iter()
        .zip(&inside)
        .map(|(p, q)| p - q)
        .collect();
    let draw = rng.random::<f64>() < survival;
    // An outcome whose branch vector is exactly zero cannot occur.
    let accepted = if survival == 0.0 {
        false
    } else if norm(&outside) == 0.0 {
        true
    } else {
        draw
    };
    let post = if accepted { inside } else { outside };
    Ok((accepted, StateVec::normalized(post)))
}
