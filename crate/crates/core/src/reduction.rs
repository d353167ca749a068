//! Partial traces, fidelities and shrinking factors.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::cloner::{
    expand_identical, max_abs, CloneOutput, JointState, PureQudit, SymmetricDensity,
};
use crate::error::{Error, Result};
use crate::fock::enumerate_sector;

const ISOTROPY_TOL: f64 = 1e-9;

/// One-qudit density operator.
#[derive(Clone, Debug)]
pub struct SingleQuditDensity {
    matrix: DMatrix<Complex64>,
}

impl SingleQuditDensity {
    /// Accepts a Hermitian, unit-trace, positive semidefinite `d × d` matrix.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = matrix.nrows();
        if d < 2 {
            return Err(Error::Dimension(d));
        }
        if matrix.ncols() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: matrix.ncols(),
            });
        }
        let skew = max_abs(&(&matrix - matrix.adjoint()));
        if skew > 1e-12 {
            return Err(Error::NotDensity(format!(
                "not Hermitian (max |ρ − ρ†| = {skew:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::NotDensity(format!("trace is {trace}, expected 1")));
        }
        let min = matrix.clone().symmetric_eigen().eigenvalues.min();
        if min < -1e-10 {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(x: &PureQudit) -> Self {
        let v = DVector::from_column_slice(x.amplitudes());
        Self {
            matrix: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigen().eigenvalues.min()
    }
}

/// Traces out the b-modes, leaving a density on the `L`-photon a-sector.
pub fn trace_out_b(out: &CloneOutput) -> SymmetricDensity {
    let basis = out.basis();
    let outputs = Arc::new(enumerate_sector(out.dim(), out.copies()).expect("valid output sector"));
    let n = outputs.len();
    let per_input = basis.emitted_basis().len();
    // a-sector index of every joint index
    let a_index: Vec<usize> = (0..basis.len())
        .map(|idx| {
            outputs
                .index_of(&basis.a_occupation(idx))
                .expect("a-occupation in L sector")
        })
        .collect();
    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    // entries sharing a b-occupation differ only in the input index
    let inputs = basis.inputs().len();
    for k in 0..per_input {
        for j in 0..inputs {
            let row = basis.index(j, k);
            for jp in 0..inputs {
                let col = basis.index(jp, k);
                let w = match out.state() {
                    JointState::Pure(v) => v[row] * v[col].conj(),
                    JointState::Mixed(m) => m[(row, col)],
                };
                rho[(a_index[row], a_index[col])] += w;
            }
        }
    }
    SymmetricDensity::from_parts(outputs, rho)
}

/// One-qudit marginal `ρ_1(r, s) = Tr(ρ_L a_s† a_r) / L`.
pub fn reduce_to_single(rho: &SymmetricDensity) -> Result<SingleQuditDensity> {
    let copies = rho.total();
    if copies == 0 {
        return Err(Error::EmptySector);
    }
    let d = rho.dim();
    let basis = rho.basis();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for (row, n) in basis.iter().enumerate() {
        for r in 0..d {
            for s in 0..d {
                let Some(np) = n.hop(r, s) else { continue };
                let col = basis.index_of(&np).expect("hop stays in sector");
                let coef = ((n[r] * np[s]) as f64).sqrt();
                out[(r, s)] += rho.matrix()[(row, col)] * coef;
            }
        }
    }
    out.unscale_mut(copies as f64);
    Ok(SingleQuditDensity { matrix: out })
}

/// One-qudit marginal of the a-modes computed straight from the joint
/// output, without forming the `L`-photon density.
pub fn single_marginal(out: &CloneOutput) -> Result<SingleQuditDensity> {
    let copies = out.copies();
    if copies == 0 {
        return Err(Error::EmptySector);
    }
    let d = out.dim();
    let basis = out.basis();
    let inputs = basis.inputs();
    let emitted = basis.emitted_basis();
    // a' − b = (a − b) with one photon moved, so hops act on the input label
    let hops: Vec<Option<usize>> = inputs
        .iter()
        .flat_map(|j| (0..d).flat_map(move |r| (0..d).map(move |s| (j, r, s))))
        .map(|(j, r, s)| j.hop(r, s).and_then(|jp| inputs.index_of(&jp)))
        .collect();
    let mut acc = DMatrix::<Complex64>::zeros(d, d);
    for (ji, j) in inputs.iter().enumerate() {
        for (ki, k) in emitted.iter().enumerate() {
            let row = basis.index(ji, ki);
            for r in 0..d {
                let a_r = j[r] + k[r];
                for s in 0..d {
                    let (col, coef) = if r == s {
                        (row, a_r as f64)
                    } else {
                        let Some(jp) = hops[(ji * d + r) * d + s] else {
                            continue;
                        };
                        (
                            basis.index(jp, ki),
                            ((a_r * (j[s] + k[s] + 1)) as f64).sqrt(),
                        )
                    };
                    let w = match out.state() {
                        JointState::Pure(v) => v[row] * v[col].conj(),
                        JointState::Mixed(m) => m[(row, col)],
                    };
                    acc[(r, s)] += w * coef;
                }
            }
        }
    }
    acc.unscale_mut(copies as f64);
    Ok(SingleQuditDensity { matrix: acc })
}

/// `⟨x| ρ_1 |x⟩`.
pub fn fidelity_single(rho: &SingleQuditDensity, x: &PureQudit) -> Result<f64> {
    if rho.dim() != x.dim() {
        return Err(Error::LengthMismatch {
            expected: rho.dim(),
            got: x.dim(),
        });
    }
    let v = DVector::from_column_slice(x.amplitudes());
    Ok((v.adjoint() * rho.matrix() * &v)[(0, 0)].re)
}

/// `⟨x^{⊗L}| Tr_b(out) |x^{⊗L}⟩`.
pub fn fidelity_global(out: &CloneOutput, x: &PureQudit) -> Result<f64> {
    if out.dim() != x.dim() {
        return Err(Error::LengthMismatch {
            expected: out.dim(),
            got: x.dim(),
        });
    }
    let target = expand_identical(x, out.copies())?;
    let outputs = target.basis();
    let basis = out.basis();
    // ⟨x^{⊗L}|a⟩ for every joint index
    let overlap: Vec<Complex64> = (0..basis.len())
        .map(|idx| {
            let a = basis.a_occupation(idx);
            target.amplitudes()[outputs.index_of(&a).expect("a-occupation in L sector")].conj()
        })
        .collect();
    let inputs = basis.inputs().len();
    let per_input = basis.emitted_basis().len();
    let mut total = 0.0;
    for k in 0..per_input {
        match out.state() {
            JointState::Pure(v) => {
                let proj: Complex64 = (0..inputs)
                    .map(|j| overlap[basis.index(j, k)] * v[basis.index(j, k)])
                    .sum();
                total += proj.norm_sqr();
            }
            JointState::Mixed(m) => {
                for j in 0..inputs {
                    for jp in 0..inputs {
                        let (row, col) = (basis.index(j, k), basis.index(jp, k));
                        total += (overlap[row] * m[(row, col)] * overlap[col].conj()).re;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// An exact non-negative rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Fraction {
    pub num: u128,
    pub den: u128,
}

impl Fraction {
    fn reduced(num: u128, den: u128) -> Self {
        let g = gcd(num, den).max(1);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // a/b vs c/d; small closed forms only, so the cross products fit
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_copies(photons: usize, copies: usize, d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if photons < 1 {
        return Err(Error::NoInputPhotons);
    }
    if copies < photons {
        return Err(Error::FewerCopies {
            input: photons,
            target: copies,
        });
    }
    Ok(())
}

/// `(M(L+d) + L − M) / (L(M+d))`, exactly.
pub fn closed_form_single_exact(photons: usize, copies: usize, d: usize) -> Result<Fraction> {
    check_copies(photons, copies, d)?;
    let (m, l, d) = (photons as u128, copies as u128, d as u128);
    let num = m.checked_mul(l + d).and_then(|v| v.checked_add(l - m));
    let den = l.checked_mul(m + d);
    match (num, den) {
        (Some(num), Some(den)) => Ok(Fraction::reduced(num, den)),
        _ => Err(Error::Overflow("single-copy fidelity")),
    }
}

/// Optimal single-copy fidelity of `M → L` cloning of qudits.
pub fn closed_form_single(photons: usize, copies: usize, d: usize) -> Result<f64> {
    closed_form_single_exact(photons, copies, d).map(Fraction::value)
}

/// `L! (M+d−1)! / (M! (L+d−1)!)`, exactly.
pub fn closed_form_global_exact(photons: usize, copies: usize, d: usize) -> Result<Fraction> {
    check_copies(photons, copies, d)?;
    // L!/M! = Π_{M<k≤L} k and (L+d−1)!/(M+d−1)! = Π_{M+d−1<k≤L+d−1} k
    let mut frac = Fraction { num: 1, den: 1 };
    for step in 1..=(copies - photons) as u128 {
        let up = photons as u128 + step;
        let down = photons as u128 + d as u128 - 1 + step;
        let num = frac
            .num
            .checked_mul(up)
            .ok_or(Error::Overflow("global fidelity"))?;
        let den = frac
            .den
            .checked_mul(down)
            .ok_or(Error::Overflow("global fidelity"))?;
        frac = Fraction::reduced(num, den);
    }
    Ok(frac)
}

/// Optimal global fidelity of `M → L` cloning of qudits.
pub fn closed_form_global(photons: usize, copies: usize, d: usize) -> Result<f64> {
    closed_form_global_exact(photons, copies, d).map(Fraction::value)
}

/// Result of fitting `ρ_out = η ρ_in + (1 − η) I/d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shrinking {
    Isotropic { eta: f64, residual: f64 },
    NotIsotropic { residual: f64 },
}

impl Shrinking {
    pub fn eta(self) -> Option<f64> {
        match self {
            Shrinking::Isotropic { eta, .. } => Some(eta),
            Shrinking::NotIsotropic { .. } => None,
        }
    }

    pub fn residual(self) -> f64 {
        match self {
            Shrinking::Isotropic { residual, .. } | Shrinking::NotIsotropic { residual } => {
                residual
            }
        }
    }
}

/// Least-squares shrinking factor between an input and output one-qudit
/// density; isotropic only if the Frobenius residual is below `1e-9`.
pub fn shrinking_factor(
    rho_in: &SingleQuditDensity,
    rho_out: &SingleQuditDensity,
) -> Result<Shrinking> {
    let d = rho_in.dim();
    if rho_out.dim() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: rho_out.dim(),
        });
    }
    let white = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
    let a = rho_in.matrix() - &white;
    let b = rho_out.matrix() - &white;
    let a_norm = a.iter().map(|c| c.norm_sqr()).sum::<f64>();
    if a_norm.sqrt() < ISOTROPY_TOL {
        // input is white noise; any η fits
        return Ok(Shrinking::NotIsotropic { residual: b.norm() });
    }
    let eta = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x.conj() * y).re)
        .sum::<f64>()
        / a_norm;
    let residual = (&b - a.scale(eta)).norm();
    Ok(if residual < ISOTROPY_TOL {
        Shrinking::Isotropic { eta, residual }
    } else {
        Shrinking::NotIsotropic { residual }
    })
}
