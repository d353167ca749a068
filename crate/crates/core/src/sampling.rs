//! Seeded random states for sweeps and tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cloner::{PureQudit, SymmetricDensity};
use crate::error::Result;
use crate::fock::sector_size;

/// Default seed for every sampled quantity.
pub const DEFAULT_SEED: u64 = 7;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure qudit.
pub fn random_pure_qudit<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PureQudit {
    let x = (0..d).map(|_| gaussian(rng)).collect();
    PureQudit::normalized(x).expect("gaussian vector is nonzero")
}

/// Haar-random `d × d` unitary (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for col in 0..d {
        let phase = r[(col, col)] / r[(col, col)].norm();
        for row in 0..d {
            q[(row, col)] *= phase;
        }
    }
    q
}

/// Random density of the given rank on the `total`-photon sector.
pub fn random_density<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    total: usize,
    rank: usize,
) -> Result<SymmetricDensity> {
    let n = sector_size(d, total);
    let g = DMatrix::from_fn(n, rank.max(1), |_, _| gaussian(rng));
    let mut m = &g * g.adjoint();
    let trace = m.trace();
    m.unscale_mut(trace.re);
    SymmetricDensity::new(d, total, m)
}
