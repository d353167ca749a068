//! Occupation-number bases of the symmetric subspace and the factorial
//! arithmetic behind the cloning amplitudes.

use std::collections::HashMap;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest `n` for which [`log_factorial`] is defined.
pub const MAX_FACTORIAL: usize = 200;

/// Photon counts per mode, `(j_1, …, j_d)` with `d ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<usize>);

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Dimension(counts.len()));
        }
        Ok(Self(counts))
    }

    /// All `total` photons in mode `mode`.
    pub fn single_mode(d: usize, mode: usize, total: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(d));
        }
        if mode >= d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: mode + 1,
            });
        }
        let mut counts = vec![0; d];
        counts[mode] = total;
        Ok(Self(counts))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Entrywise sum; both vectors must have the same dimension.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Entrywise difference, `None` if any entry would go negative.
    pub fn checked_minus(&self, other: &Self) -> Option<Self> {
        if self.dim() != other.dim() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    /// Move one photon from mode `from` to mode `to`; `None` if `from` is empty.
    pub fn hop(&self, from: usize, to: usize) -> Option<Self> {
        if self.0[from] == 0 {
            return None;
        }
        let mut counts = self.0.clone();
        counts[from] -= 1;
        counts[to] += 1;
        Some(Self(counts))
    }

    /// Number of modes holding at least one photon.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&n| n > 0).count()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for OccupationVector {
    type Output = usize;

    fn index(&self, mode: usize) -> &usize {
        &self.0[mode]
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl FromStr for OccupationVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("invalid photon count {tok:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(counts)
    }
}

/// All occupation vectors of dimension `d` with a fixed photon total, in
/// canonical (reverse-lexicographic) order.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    d: usize,
    total: usize,
    vectors: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[OccupationVector] {
        &self.vectors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, OccupationVector> {
        self.vectors.iter()
    }

    pub fn index_of(&self, v: &OccupationVector) -> Option<usize> {
        self.index.get(v).copied()
    }
}

impl Index<usize> for SectorBasis {
    type Output = OccupationVector;

    fn index(&self, i: usize) -> &OccupationVector {
        &self.vectors[i]
    }
}

/// Enumerates the sector of `total` photons in `d` modes.
///
/// Vectors come out with the first mode weakly decreasing, so for `d = 2,
/// total = 2` the order is `(2,0), (1,1), (0,2)`.
pub fn enumerate_sector(d: usize, total: usize) -> Result<SectorBasis> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    let mut vectors = Vec::new();
    let mut prefix = Vec::with_capacity(d);
    fill(d, total, &mut prefix, &mut vectors);
    let index = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    Ok(SectorBasis {
        d,
        total,
        vectors,
        index,
    })
}

fn fill(d: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<OccupationVector>) {
    if prefix.len() + 1 == d {
        prefix.push(remaining);
        out.push(OccupationVector(prefix.clone()));
        prefix.pop();
        return;
    }
    for n in (0..=remaining).rev() {
        prefix.push(n);
        fill(d, remaining - n, prefix, out);
        prefix.pop();
    }
}

/// `C(total + d − 1, d − 1)`, the size of a sector.
pub fn sector_size(d: usize, total: usize) -> usize {
    let (n, k) = (total + d - 1, d - 1);
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(MAX_FACTORIAL + 1);
        // exact products while they fit in a u64, then accumulate logs
        let mut exact: u64 = 1;
        for n in 0..=20u64 {
            if n > 1 {
                exact *= n;
            }
            table.push(if n < 2 { 0.0 } else { (exact as f64).ln() });
        }
        for n in 21..=MAX_FACTORIAL {
            let prev = table[n - 1];
            table.push(prev + (n as f64).ln());
        }
        table
    })
}

/// `ln(n!)` for `n ≤ 200`; exactly `0.0` for `n ∈ {0, 1}`.
pub fn log_factorial(n: usize) -> Result<f64> {
    log_factorial_table()
        .get(n)
        .copied()
        .ok_or(Error::FactorialRange(n))
}

/// Coefficient of `|j+k⟩_a |k⟩_b` in the ladder state `|F_l, j⟩`:
///
/// ```text
/// √[(M+d−1)! l! / (M+l+d−1)!] · Π_i √[(k_i+j_i)! / (k_i! j_i!)]
/// ```
///
/// with `M = |j|` and `l = |k|`.
pub fn clone_amplitude(j: &OccupationVector, k: &OccupationVector) -> Result<f64> {
    if j.dim() != k.dim() {
        return Err(Error::LengthMismatch {
            expected: j.dim(),
            got: k.dim(),
        });
    }
    let d = j.dim();
    let m = j.total();
    let l = k.total();
    let mut log = log_factorial(m + d - 1)? + log_factorial(l)? - log_factorial(m + l + d - 1)?;
    for (ji, ki) in j.iter().zip(k.iter()) {
        log += log_factorial(ki + ji)? - log_factorial(ki)? - log_factorial(ji)?;
    }
    Ok((0.5 * log).exp())
}
