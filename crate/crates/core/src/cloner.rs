//! Cloning output states.
//!
//! For an occupation-basis input `|j⟩_a` the state after `l` emissions is
//!
//! ```text
//! |F_l, j⟩ = Σ_{|k|=l} clone_amplitude(j, k) |j+k⟩_a |k⟩_b |N−l⟩_c
//! ```
//!
//! Pure and mixed symmetric inputs are handled by linearity. The c-mode factor
//! is constant within an `l` sector and is kept only as metadata.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    clone_amplitude, enumerate_sector, log_factorial, OccupationVector, SectorBasis,
};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_CLIP: f64 = -1e-10;
const EIGEN_REJECT: f64 = -1e-8;

/// A single-photon qudit state `Σ_i x_i a_i† |0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureQudit {
    x: Vec<Complex64>,
}

impl PureQudit {
    pub fn new(x: Vec<Complex64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Dimension(x.len()));
        }
        let norm_sqr: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { x })
    }

    pub fn from_real(x: &[f64]) -> Result<Self> {
        Self::new(x.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(x: Vec<Complex64>) -> Result<Self> {
        let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(x.into_iter().map(|c| c / norm).collect())
    }

    pub fn basis(d: usize, mode: usize) -> Result<Self> {
        if mode >= d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: mode + 1,
            });
        }
        let mut x = vec![Complex64::new(0.0, 0.0); d];
        x[mode] = Complex64::new(1.0, 0.0);
        Self::new(x)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.x
    }
}

impl FromStr for PureQudit {
    type Err = Error;

    /// Comma-separated complex numbers written `re+imi`; plain reals accepted.
    fn from_str(s: &str) -> Result<Self> {
        let x = s
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()?;
        Self::new(x)
    }
}

fn parse_complex(tok: &str) -> Result<Complex64> {
    let tok = tok.trim();
    let bad = || Error::Parse(format!("invalid complex number {tok:?}"));
    let Some(body) = tok.strip_suffix('i') else {
        return tok
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // split at the last sign that is not an exponent sign or a leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    let im = im.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// A pure state of `total` identical bosonic qudits, in the canonical
/// occupation basis.
#[derive(Clone, Debug)]
pub struct SymmetricState {
    basis: Arc<SectorBasis>,
    amplitudes: Vec<Complex64>,
}

impl SymmetricState {
    pub fn new(basis: Arc<SectorBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis_state(j: &OccupationVector) -> Result<Self> {
        let basis = Arc::new(enumerate_sector(j.dim(), j.total())?);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        amplitudes[basis.index_of(j).expect("vector lies in its own sector")] =
            Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn total(&self) -> usize {
        self.basis.total()
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// `|x⟩^{⊗M}` in the occupation basis: the coefficient of `|j⟩` is
/// `√(M! / Π j_i!) · Π x_i^{j_i}`.
pub fn expand_identical(x: &PureQudit, photons: usize) -> Result<SymmetricState> {
    let basis = Arc::new(enumerate_sector(x.dim(), photons)?);
    let log_m = log_factorial(photons)?;
    let amplitudes = basis
        .iter()
        .map(|j| {
            let mut log = log_m;
            let mut prod = Complex64::new(1.0, 0.0);
            for (xi, ji) in x.amplitudes().iter().zip(j.iter()) {
                log -= log_factorial(ji)?;
                prod *= xi.powu(ji as u32);
            }
            Ok(prod * (0.5 * log).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymmetricState { basis, amplitudes })
}

/// Density operator on one symmetric sector.
#[derive(Clone, Debug)]
pub struct SymmetricDensity {
    basis: Arc<SectorBasis>,
    matrix: DMatrix<Complex64>,
}

impl SymmetricDensity {
    /// Validates a user-supplied matrix. Eigenvalues down to `−1e-8` are
    /// clipped to zero and the result renormalized; anything more negative,
    /// a non-Hermitian matrix, or a trace away from one is rejected.
    pub fn new(d: usize, total: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let basis = Arc::new(enumerate_sector(d, total)?);
        let n = basis.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        let skew = max_abs(&(&matrix - matrix.adjoint()));
        if skew > HERMITIAN_TOL {
            return Err(Error::NotDensity(format!(
                "not Hermitian (max |ρ − ρ†| = {skew:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace is {trace}, expected 1")));
        }
        let mut matrix = (&matrix + matrix.adjoint()).scale(0.5);
        let eig = matrix.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < EIGEN_REJECT {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        if min < EIGEN_CLIP {
            let clipped = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0), 0.0));
            matrix =
                &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.adjoint();
        }
        let trace = matrix.trace().re;
        if trace != 1.0 {
            matrix.unscale_mut(trace);
        }
        Ok(Self { basis, matrix })
    }

    pub(crate) fn from_parts(basis: Arc<SectorBasis>, matrix: DMatrix<Complex64>) -> Self {
        Self { basis, matrix }
    }

    pub fn from_pure(state: &SymmetricState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self {
            basis: state.basis.clone(),
            matrix: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(d: usize, total: usize) -> Result<Self> {
        let basis = Arc::new(enumerate_sector(d, total)?);
        let n = basis.len();
        let matrix = DMatrix::from_diagonal_element(n, n, Complex64::new(1.0 / n as f64, 0.0));
        Ok(Self { basis, matrix })
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, p: f64, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() || self.total() != other.total() {
            return Err(Error::LengthMismatch {
                expected: self.basis.len(),
                got: other.basis.len(),
            });
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: self.matrix.scale(p) + other.matrix.scale(1.0 - p),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn total(&self) -> usize {
        self.basis.total()
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// Index set of a cloning output: pairs `(j, k)` with `|j| = M` and `|k| = l`,
/// standing for `|j+k⟩_a |k⟩_b`. Ordered by `j` first, both in canonical order.
#[derive(Clone, Debug)]
pub struct JointBasis {
    inputs: Arc<SectorBasis>,
    emitted: Arc<SectorBasis>,
}

impl JointBasis {
    pub fn new(d: usize, photons: usize, emitted: usize) -> Result<Self> {
        Ok(Self {
            inputs: Arc::new(enumerate_sector(d, photons)?),
            emitted: Arc::new(enumerate_sector(d, emitted)?),
        })
    }

    pub fn dim(&self) -> usize {
        self.inputs.dim()
    }

    pub fn photons(&self) -> usize {
        self.inputs.total()
    }

    pub fn emitted(&self) -> usize {
        self.emitted.total()
    }

    pub fn copies(&self) -> usize {
        self.photons() + self.emitted()
    }

    pub fn len(&self) -> usize {
        self.inputs.len() * self.emitted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inputs(&self) -> &Arc<SectorBasis> {
        &self.inputs
    }

    pub fn emitted_basis(&self) -> &Arc<SectorBasis> {
        &self.emitted
    }

    pub fn index(&self, input: usize, emitted: usize) -> usize {
        input * self.emitted.len() + emitted
    }

    /// `(input index, emitted index)` of a joint index.
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.emitted.len(), idx % self.emitted.len())
    }

    pub fn a_occupation(&self, idx: usize) -> OccupationVector {
        let (j, k) = self.split(idx);
        self.inputs[j]
            .plus(&self.emitted[k])
            .expect("same dimension")
    }

    pub fn b_occupation(&self, idx: usize) -> OccupationVector {
        self.emitted[self.split(idx).1].clone()
    }

    /// Joint index of `|a⟩_a |b⟩_b`, if the pair conserves `a − b ∈` input sector.
    pub fn index_of(&self, a: &OccupationVector, b: &OccupationVector) -> Option<usize> {
        let k = self.emitted.index_of(b)?;
        let j = self.inputs.index_of(&a.checked_minus(b)?)?;
        Some(self.index(j, k))
    }
}

#[derive(Clone, Debug)]
pub enum JointState {
    Pure(Vec<Complex64>),
    Mixed(DMatrix<Complex64>),
}

/// Joint a⊗b state after `l` emissions, conditioned on that `l`.
#[derive(Clone, Debug)]
pub struct CloneOutput {
    basis: JointBasis,
    state: JointState,
    n_excited: Option<usize>,
}

impl CloneOutput {
    pub fn basis(&self) -> &JointBasis {
        &self.basis
    }

    pub fn state(&self) -> &JointState {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn photons(&self) -> usize {
        self.basis.photons()
    }

    pub fn emitted(&self) -> usize {
        self.basis.emitted()
    }

    /// `L = M + l`.
    pub fn copies(&self) -> usize {
        self.basis.copies()
    }

    /// Number of initially excited atoms, when known; the c-mode then holds `N − l`.
    pub fn n_excited(&self) -> Option<usize> {
        self.n_excited
    }

    pub fn with_excited(mut self, n: usize) -> Self {
        self.n_excited = Some(n);
        self
    }

    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        match &self.state {
            JointState::Pure(v) => Some(v),
            JointState::Mixed(_) => None,
        }
    }

    pub fn density(&self) -> DMatrix<Complex64> {
        match &self.state {
            JointState::Pure(v) => {
                let v = nalgebra::DVector::from_column_slice(v);
                &v * v.adjoint()
            }
            JointState::Mixed(m) => m.clone(),
        }
    }

    /// Norm squared of a pure output, trace of a mixed one.
    pub fn trace(&self) -> f64 {
        match &self.state {
            JointState::Pure(v) => v.iter().map(|c| c.norm_sqr()).sum(),
            JointState::Mixed(m) => m.trace().re,
        }
    }

    /// `(a-occupation, b-occupation, amplitude)` for every nonzero pure amplitude.
    pub fn nonzero_terms(&self) -> Vec<(OccupationVector, OccupationVector, Complex64)> {
        let Some(amps) = self.amplitudes() else {
            return Vec::new();
        };
        amps.iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(idx, c)| {
                (
                    self.basis.a_occupation(idx),
                    self.basis.b_occupation(idx),
                    *c,
                )
            })
            .collect()
    }
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn amplitude_table(basis: &JointBasis) -> Result<Vec<f64>> {
    let mut table = Vec::with_capacity(basis.len());
    for j in basis.inputs().iter() {
        for k in basis.emitted_basis().iter() {
            table.push(clone_amplitude(j, k)?);
        }
    }
    Ok(table)
}

/// `|F_l, j⟩` restricted to the a⊗b modes.
pub fn clone_basis_state(j: &OccupationVector, l: usize) -> Result<CloneOutput> {
    let basis = JointBasis::new(j.dim(), j.total(), l)?;
    let input = basis
        .inputs()
        .index_of(j)
        .expect("vector lies in its own sector");
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
    for (kk, k) in basis.emitted_basis().iter().enumerate() {
        amplitudes[basis.index(input, kk)] = Complex64::new(clone_amplitude(j, k)?, 0.0);
    }
    Ok(CloneOutput {
        basis,
        state: JointState::Pure(amplitudes),
        n_excited: None,
    })
}

/// Output for `M` identical copies of `x` after `l` emissions.
pub fn clone_pure(x: &PureQudit, photons: usize, l: usize) -> Result<CloneOutput> {
    let input = expand_identical(x, photons)?;
    clone_symmetric(&input, l)
}

/// Output for an arbitrary pure symmetric input.
pub fn clone_symmetric(input: &SymmetricState, l: usize) -> Result<CloneOutput> {
    let basis = JointBasis::new(input.dim(), input.total(), l)?;
    let table = amplitude_table(&basis)?;
    let per_input = basis.emitted_basis().len();
    let amplitudes = table
        .iter()
        .enumerate()
        .map(|(idx, &w)| input.amplitudes()[idx / per_input] * w)
        .collect();
    Ok(CloneOutput {
        basis,
        state: JointState::Pure(amplitudes),
        n_excited: None,
    })
}

/// Output for a mixed symmetric input `ρ = Σ α_{jj'} |j⟩⟨j'|`:
/// `Σ α_{jj'} |F_l, j⟩⟨F_l, j'|` on the a⊗b modes.
pub fn clone_mixed(rho: &SymmetricDensity, l: usize) -> Result<CloneOutput> {
    let basis = JointBasis::new(rho.dim(), rho.total(), l)?;
    let table = amplitude_table(&basis)?;
    let n = basis.len();
    let matrix = DMatrix::from_fn(n, n, |row, col| {
        let (j, _) = basis.split(row);
        let (jp, _) = basis.split(col);
        rho.matrix()[(j, jp)] * (table[row] * table[col])
    });
    Ok(CloneOutput {
        basis,
        state: JointState::Mixed(matrix),
        n_excited: None,
    })
}

impl fmt::Display for CloneOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CloneOutput(d={}, M={}, l={}",
            self.dim(),
            self.photons(),
            self.emitted()
        )?;
        if let Some(n) = self.n_excited {
            write!(f, ", N={n}")?;
        }
        f.write_str(")")
    }
}
