//! Brute-force verifier for the ladder reduction.
//!
//! Builds the oscillator Hamiltonian `γ Σ_i (a_i b_i c† + a_i† b_i† c)` on
//! explicit Fock configurations of the `2d + 1` modes, discovering the sector
//! reachable from `|j⟩_a |0⟩_b |N⟩_c` by breadth-first search. Nothing here
//! assumes the ladder structure; the states under test are only embedded into
//! this basis and compared.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cloner::clone_basis_state;
use crate::error::{Error, Result};
use crate::fock::{enumerate_sector, OccupationVector};
use crate::ladder::{evolve, ladder_matrix, LadderHamiltonian};
use crate::sampling::seeded;

/// Tolerances applied by the verifier.
pub const LADDER_TOL: f64 = 1e-10;
pub const ORTHONORMALITY_TOL: f64 = 1e-12;
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const EVOLUTION_TOL: f64 = 1e-9;
pub const UNITARITY_TOL: f64 = 1e-10;

/// Default cap on the number of configurations in one sector.
pub const DEFAULT_SECTOR_LIMIT: usize = 512;

/// Occupations of `a_1 … a_d, b_1 … b_d, c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration(Vec<usize>);

impl Configuration {
    fn new(a: &[usize], b: &[usize], c: usize) -> Self {
        let mut modes = Vec::with_capacity(2 * a.len() + 1);
        modes.extend_from_slice(a);
        modes.extend_from_slice(b);
        modes.push(c);
        Self(modes)
    }

    pub fn a(&self) -> &[usize] {
        let d = self.0.len() / 2;
        &self.0[..d]
    }

    pub fn b(&self) -> &[usize] {
        let d = self.0.len() / 2;
        &self.0[d..2 * d]
    }

    pub fn c(&self) -> usize {
        *self.0.last().expect("c mode present")
    }
}

/// Closed sector of Fock configurations reachable from the initial state.
#[derive(Clone, Debug)]
pub struct FullSectorBasis {
    pub d: usize,
    pub n_excited: usize,
    pub j: OccupationVector,
    states: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
}

impl FullSectorBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Configuration] {
        &self.states
    }

    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.index.get(config).copied()
    }
}

/// Dense Hamiltonian on a [`FullSectorBasis`].
#[derive(Clone, Debug)]
pub struct FullHamiltonian {
    pub basis: FullSectorBasis,
    pub matrix: DMatrix<f64>,
}

/// Nonzero images of `config` under every term of the Hamiltonian, with
/// their matrix elements (for unit coupling).
fn apply_terms(config: &Configuration, d: usize) -> Vec<(Configuration, f64)> {
    let mut out = Vec::new();
    let modes = &config.0;
    let c = 2 * d;
    for i in 0..d {
        let (a, b) = (i, d + i);
        // a_i b_i c†: absorb a photon, return an atom to the excited level
        if modes[a] > 0 && modes[b] > 0 {
            let mut next = modes.clone();
            next[a] -= 1;
            next[b] -= 1;
            next[c] += 1;
            let amp = ((modes[a] * modes[b] * (modes[c] + 1)) as f64).sqrt();
            out.push((Configuration(next), amp));
        }
        // a_i† b_i† c: emit a photon into mode i
        if modes[c] > 0 {
            let mut next = modes.clone();
            next[a] += 1;
            next[b] += 1;
            next[c] -= 1;
            let amp = (((modes[a] + 1) * (modes[b] + 1) * modes[c]) as f64).sqrt();
            out.push((Configuration(next), amp));
        }
    }
    out
}

/// Builds the Hamiltonian on the sector containing `|j⟩_a |0⟩_b |N⟩_c`.
/// Fails if the sector has more than `limit` configurations.
pub fn build_full_hamiltonian(
    d: usize,
    n_excited: usize,
    j: &OccupationVector,
    gamma: f64,
    limit: usize,
) -> Result<FullHamiltonian> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if j.dim() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: j.dim(),
        });
    }
    let start = Configuration::new(j.counts(), &vec![0; d], n_excited);
    let mut states = vec![start.clone()];
    let mut index = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    let mut edges = Vec::new();
    while let Some(config) = queue.pop_front() {
        let from = index[&config];
        for (next, amp) in apply_terms(&config, d) {
            let to = match index.get(&next) {
                Some(&to) => to,
                None => {
                    if states.len() == limit {
                        return Err(Error::SectorTooLarge { limit });
                    }
                    let to = states.len();
                    index.insert(next.clone(), to);
                    states.push(next.clone());
                    queue.push_back(next);
                    to
                }
            };
            edges.push((to, from, amp));
        }
    }
    let n = states.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (to, from, amp) in edges {
        matrix[(to, from)] += gamma * amp;
    }
    let basis = FullSectorBasis {
        d,
        n_excited,
        j: j.clone(),
        states,
        index,
    };
    Ok(FullHamiltonian { basis, matrix })
}

/// One named comparison in a verification report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Structured verification outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub params: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(params: Value) -> Self {
        Self {
            params,
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn record(&mut self, name: &str, max_deviation: f64, tolerance: f64) {
        let pass = max_deviation <= tolerance;
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            max_deviation,
            tolerance,
            pass,
        });
    }

    /// Folds `other` in, keeping the worst deviation per check name.
    pub fn absorb(&mut self, other: &Report) {
        for check in &other.checks {
            match self.checks.iter_mut().find(|c| c.name == check.name) {
                Some(mine) => {
                    if check.max_deviation.is_nan() || check.max_deviation > mine.max_deviation {
                        mine.max_deviation = check.max_deviation;
                    }
                    mine.pass &= check.pass;
                }
                None => self.checks.push(check.clone()),
            }
        }
        self.pass &= other.pass;
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Knobs shared by the verification entry points.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub sector_limit: usize,
    /// Added to every ladder coupling before comparison; nonzero values must
    /// make verification fail.
    pub perturbation: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            sector_limit: DEFAULT_SECTOR_LIMIT,
            perturbation: 0.0,
        }
    }
}

struct Embedding {
    full: FullHamiltonian,
    ladder: LadderHamiltonian,
    /// Column `l` is `|F_l, j⟩` in the full basis.
    columns: DMatrix<f64>,
    /// Weight of the ladder states that fell outside the discovered sector.
    missing: f64,
}

fn embed(
    d: usize,
    n_excited: usize,
    j: &OccupationVector,
    gamma: f64,
    opts: &VerifyOptions,
) -> Result<Embedding> {
    let full = build_full_hamiltonian(d, n_excited, j, gamma, opts.sector_limit)?;
    let ladder = ladder_matrix(d, n_excited, j.total(), gamma)?.perturbed(opts.perturbation);
    let mut columns = DMatrix::zeros(full.basis.len(), n_excited + 1);
    let mut missing: f64 = 0.0;
    for l in 0..=n_excited {
        for (a, b, amp) in clone_basis_state(j, l)?.nonzero_terms() {
            let config = Configuration::new(a.counts(), b.counts(), n_excited - l);
            match full.basis.index_of(&config) {
                Some(row) => columns[(row, l)] = amp.re,
                None => missing = missing.max(amp.norm()),
            }
        }
    }
    Ok(Embedding {
        full,
        ladder,
        columns,
        missing,
    })
}

fn conservation_violation(basis: &FullSectorBasis) -> f64 {
    let j = basis.j.counts();
    basis
        .states()
        .iter()
        .map(|s| {
            let diff = s
                .a()
                .iter()
                .zip(s.b())
                .zip(j)
                .map(|((&a, &b), &ji)| (a as i64 - b as i64 - ji as i64).abs());
            let excitations = (s.c() + s.b().iter().sum::<usize>()) as i64 - basis.n_excited as i64;
            diff.chain(std::iter::once(excitations.abs()))
                .max()
                .unwrap_or(0) as f64
        })
        .fold(0.0, f64::max)
}

fn expected_sector_size(d: usize, n_excited: usize) -> usize {
    (0..=n_excited)
        .map(|l| enumerate_sector(d, l).map(|s| s.len()).unwrap_or(0))
        .sum()
}

fn sector_params(d: usize, n_excited: usize, j: &OccupationVector, gamma: f64) -> Value {
    json!({ "d": d, "n": n_excited, "j": j.counts(), "gamma": gamma })
}

/// Checks that `H|F_l, j⟩` stays in `span{|F_{l−1}, j⟩, |F_{l+1}, j⟩}` with the
/// ladder's couplings, on the explicit Fock sector.
pub fn verify_ladder(
    d: usize,
    n_excited: usize,
    j: &OccupationVector,
    gamma: f64,
    opts: &VerifyOptions,
) -> Result<Report> {
    let emb = embed(d, n_excited, j, gamma, opts)?;
    let h = &emb.full.matrix;
    let p = &emb.columns;
    let mut report = Report::new(sector_params(d, n_excited, j, gamma));

    let size_gap = (emb.full.basis.len() as f64 - expected_sector_size(d, n_excited) as f64).abs();
    report.record("sector_size", size_gap, 0.0);
    report.record(
        "sector_conservation",
        conservation_violation(&emb.full.basis),
        0.0,
    );
    report.record("hermiticity", (h - h.transpose()).amax(), HERMITICITY_TOL);
    report.record("embedding_coverage", emb.missing, 0.0);

    let gram = p.transpose() * p;
    let identity = DMatrix::<f64>::identity(n_excited + 1, n_excited + 1);
    report.record(
        "embedded_orthonormality",
        (gram - identity).amax(),
        ORTHONORMALITY_TOL,
    );

    let projected = p.transpose() * h * p;
    report.record(
        "ladder_elements",
        (&projected - emb.ladder.to_dense()).amax(),
        LADDER_TOL,
    );

    let mut residual: f64 = 0.0;
    for l in 0..=n_excited {
        let mut r: DVector<f64> = h * p.column(l);
        for lp in [l.wrapping_sub(1), l + 1] {
            if lp <= n_excited {
                let coef = p.column(lp).dot(&r);
                r -= p.column(lp) * coef;
            }
        }
        residual = residual.max(r.norm());
    }
    report.record("invariant_subspace_residual", residual, LADDER_TOL);
    Ok(report)
}

/// Compares `evolve` against the dense exponential of the full sector
/// Hamiltonian applied to `|j⟩_a |0⟩_b |N⟩_c`.
pub fn verify_evolution(
    d: usize,
    n_excited: usize,
    j: &OccupationVector,
    gamma: f64,
    t: f64,
    opts: &VerifyOptions,
) -> Result<Report> {
    if !t.is_finite() {
        return Err(Error::NonFiniteTime(t));
    }
    let emb = embed(d, n_excited, j, gamma, opts)?;
    let mut params = sector_params(d, n_excited, j, gamma);
    params["t"] = json!(t);
    let mut report = Report::new(params);

    let generator = emb.full.matrix.map(|h| Complex64::new(0.0, -h * t));
    let propagator = generator.exp();
    let psi = propagator.column(0).into_owned();
    let columns = emb.columns.map(|v| Complex64::new(v, 0.0));
    let overlaps = columns.adjoint() * &psi;

    let profile = evolve(&emb.ladder, t)?;
    let deviation = overlaps
        .iter()
        .zip(&profile.amplitudes)
        .map(|(g, f)| (g - f).norm())
        .fold(0.0, f64::max);
    report.record("evolution_amplitudes", deviation, EVOLUTION_TOL);

    let in_ladder: f64 = overlaps.iter().map(|g| g.norm_sqr()).sum();
    report.record(
        "ladder_leakage",
        (psi.norm_squared() - in_ladder).abs(),
        EVOLUTION_TOL,
    );
    report.record(
        "ladder_unitarity",
        (profile.total_probability() - 1.0).abs(),
        UNITARITY_TOL,
    );
    Ok(report)
}

/// Bounds for a full verification sweep.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub max_d: usize,
    pub max_excited: usize,
    pub max_photons: usize,
    pub gamma: f64,
    /// Random evolution times drawn per sector, uniform in `[0, max_time]`.
    pub times_per_sector: usize,
    pub max_time: f64,
    pub seed: u64,
    pub options: VerifyOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            max_d: 3,
            max_excited: 3,
            max_photons: 2,
            gamma: 1.0,
            times_per_sector: 2,
            max_time: 5.0,
            seed: crate::sampling::DEFAULT_SEED,
            options: VerifyOptions::default(),
        }
    }
}

/// Every `(d, N, j)` with `2 ≤ d ≤ max_d`, `1 ≤ N ≤ max_excited`, `|j| ≤ max_photons`.
pub fn suite_sectors(cfg: &SuiteConfig) -> Result<Vec<(usize, usize, OccupationVector)>> {
    let mut out = Vec::new();
    for d in 2..=cfg.max_d {
        for n in 1..=cfg.max_excited {
            for m in 0..=cfg.max_photons {
                for j in enumerate_sector(d, m)?.iter() {
                    out.push((d, n, j.clone()));
                }
            }
        }
    }
    Ok(out)
}

/// Runs [`verify_ladder`] and seeded [`verify_evolution`] draws over every
/// suite sector and folds the results into one report.
pub fn verify_suite(cfg: &SuiteConfig) -> Result<Report> {
    let sectors = suite_sectors(cfg)?;
    let mut rng = seeded(cfg.seed);
    let mut report = Report::new(json!({
        "max_d": cfg.max_d,
        "max_n": cfg.max_excited,
        "max_m": cfg.max_photons,
        "gamma": cfg.gamma,
        "times_per_sector": cfg.times_per_sector,
        "max_time": cfg.max_time,
        "seed": cfg.seed,
        "sectors": sectors.len(),
        "perturbation": cfg.options.perturbation,
    }));
    report.checks.clear();
    for (d, n, j) in &sectors {
        report.absorb(&verify_ladder(*d, *n, j, cfg.gamma, &cfg.options)?);
        for _ in 0..cfg.times_per_sector {
            let t = rng.random_range(0.0..=cfg.max_time);
            report.absorb(&verify_evolution(*d, *n, j, cfg.gamma, t, &cfg.options)?);
        }
    }
    Ok(report)
}
