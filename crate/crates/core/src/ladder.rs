//! Restriction of the cloning Hamiltonian to the ladder `span{|F_l, j⟩}` and
//! the resulting emission amplitudes `f_l(t)`.
//!
//! On the ladder the Hamiltonian is real symmetric tridiagonal with zero
//! diagonal:
//!
//! ```text
//! ⟨F_{l+1}| H |F_l⟩ = γ √((l+1)(N−l)(M+l+d)),   l = 0 … N−1
//! ```
//!
//! The two boundary rows `H|F_0⟩ = γ√(N(M+d)) |F_1⟩` and
//! `H|F_N⟩ = γ√(N(M+N+d−1)) |F_{N−1}⟩` are the `l = 0` and `l = N−1`
//! entries of the same sequence. Only `M = |j|`, not `j` itself, enters.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tridiag::symmetric_tridiagonal_eigen;

/// Tridiagonal ladder Hamiltonian for `N` excited atoms and `M` input photons.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderHamiltonian {
    pub d: usize,
    pub n_excited: usize,
    pub photons: usize,
    pub gamma: f64,
    offdiag: Vec<f64>,
}

impl LadderHamiltonian {
    /// Dimension `N + 1` of the ladder.
    pub fn len(&self) -> usize {
        self.n_excited + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `offdiag()[l] = ⟨F_{l+1}|H|F_l⟩`.
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn diagonal(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    /// Copy with every coupling shifted by `delta`; a negative control for the
    /// verifier.
    pub(crate) fn perturbed(&self, delta: f64) -> Self {
        let mut h = self.clone();
        h.offdiag.iter_mut().for_each(|w| *w += delta);
        h
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut h = DMatrix::zeros(n, n);
        for (l, &w) in self.offdiag.iter().enumerate() {
            h[(l + 1, l)] = w;
            h[(l, l + 1)] = w;
        }
        h
    }
}

/// Builds the ladder Hamiltonian for qudit dimension `d`.
pub fn ladder_matrix(
    d: usize,
    n_excited: usize,
    photons: usize,
    gamma: f64,
) -> Result<LadderHamiltonian> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if n_excited < 1 {
        return Err(Error::NoExcitedAtoms);
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Coupling(gamma));
    }
    let offdiag = (0..n_excited)
        .map(|l| gamma * (((l + 1) * (n_excited - l) * (photons + l + d)) as f64).sqrt())
        .collect();
    Ok(LadderHamiltonian {
        d,
        n_excited,
        photons,
        gamma,
        offdiag,
    })
}

/// Emission amplitudes at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionProfile {
    pub t: f64,
    pub amplitudes: Vec<Complex64>,
    pub probabilities: Vec<f64>,
}

impl EvolutionProfile {
    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// `f_l(t) = ⟨F_l| e^{−iHt} |F_0⟩`, by eigendecomposition of the ladder.
pub fn evolve(h: &LadderHamiltonian, t: f64) -> Result<EvolutionProfile> {
    if !t.is_finite() {
        return Err(Error::NonFiniteTime(t));
    }
    let eig = symmetric_tridiagonal_eigen(&h.diagonal(), h.offdiag())?;
    let n = h.len();
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &lambda)| Complex64::from_polar(eig.vectors[(0, k)], -lambda * t))
        .collect();
    let amplitudes: Vec<Complex64> = (0..n)
        .map(|l| {
            phases
                .iter()
                .enumerate()
                .map(|(k, p)| p * eig.vectors[(l, k)])
                .sum()
        })
        .collect();
    let probabilities = amplitudes.iter().map(|f| f.norm_sqr()).collect();
    Ok(EvolutionProfile {
        t,
        amplitudes,
        probabilities,
    })
}

/// `|f_l(t)|²` for `l = 0 … N`.
pub fn emission_probabilities(h: &LadderHamiltonian, t: f64) -> Result<Vec<f64>> {
    evolve(h, t).map(|p| p.probabilities)
}
