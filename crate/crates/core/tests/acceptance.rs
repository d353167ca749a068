//! Acceptance suite. Runs each criterion in order, prints one PASS/FAIL line
//! per criterion, and exits non-zero if any fail.

use num::rational::BigRational;
use num::{BigInt, One, ToPrimitive};
use rand::Rng;
use std::process::Command;
use std::time::{Duration, Instant};
use stimclone::cloner::max_abs;
use stimclone::oracle::{verify_evolution, verify_ladder, Report, VerifyOptions};
use stimclone::reduction::{closed_form_global, single_marginal};
use stimclone::sampling::{random_density, random_pure_qudit, seeded};
use stimclone::{
    clone_amplitude, clone_basis_state, clone_mixed, clone_pure, closed_form_single,
    enumerate_sector, evolve, expand_identical, fidelity_global, fidelity_single, ladder_matrix,
    reduce_to_single, shrinking_factor, trace_out_b, Complex64, OccupationVector, PureQudit,
    SingleQuditDensity, SymmetricDensity,
};

const TOL: f64 = 1e-10;
const GRID_D: [usize; 3] = [2, 3, 4];
const GRID_M: [usize; 3] = [1, 2, 3];
const GRID_EXTRA: [usize; 4] = [0, 1, 2, 3];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
/// `(a, b, coefficient)` terms of one ladder state.
type Terms = Vec<(Vec<usize>, Vec<usize>, f64)>;

fn grid() -> impl Iterator<Item = (usize, usize, usize)> {
    GRID_D.into_iter().flat_map(|d| {
        GRID_M
            .into_iter()
            .flat_map(move |m| GRID_EXTRA.into_iter().map(move |e| (d, m, m + e)))
    })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: stimclone::Error) -> String {
    e.to_string()
}

fn single_via_trace(x: &PureQudit, m: usize, copies: usize) -> Result<f64, String> {
    let out = clone_pure(x, m, copies - m).map_err(err)?;
    let rho = reduce_to_single(&trace_out_b(&out)).map_err(err)?;
    fidelity_single(&rho, x).map_err(err)
}

fn probe_qudit(d: usize) -> PureQudit {
    let x: Vec<Complex64> = (0..d)
        .map(|i| Complex64::new(1.0 + i as f64, 0.5 - 0.3 * i as f64))
        .collect();
    PureQudit::normalized(x).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (d, m, copies) in grid() {
        let x = probe_qudit(d);
        let f = single_via_trace(&x, m, copies)?;
        let want = (m * (copies + d) + copies - m) as f64 / (copies * (m + d)) as f64;
        worst = worst.max((f - want).abs());
        ensure((f - want).abs() <= TOL, || {
            format!("d={d} M={m} L={copies}: {f} vs {want}")
        })?;
    }
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let f2 = single_via_trace(&PureQudit::from_real(&[half, half]).unwrap(), 1, 2)?;
    ensure((f2 - 5.0 / 6.0).abs() <= TOL, || {
        format!("F(1→2, d=2) = {f2}")
    })?;
    let f3 = single_via_trace(&PureQudit::basis(3, 0).unwrap(), 1, 2)?;
    ensure((f3 - 0.75).abs() <= TOL, || format!("F(1→2, d=3) = {f3}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("runtime {elapsed:?}")
    })?;
    Ok(format!(
        "36 grid points, max |ΔF| = {worst:.2e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, m, copies) in grid() {
        let x = probe_qudit(d);
        let g = fidelity_global(&clone_pure(&x, m, copies - m).map_err(err)?, &x).map_err(err)?;
        // independent product form of L!(M+d−1)!/(M!(L+d−1)!)
        let want: f64 = (m + 1..=copies)
            .map(|k| k as f64 / (k + d - 1) as f64)
            .product();
        worst = worst.max((g - want).abs());
        ensure((g - want).abs() <= TOL, || {
            format!("d={d} M={m} L={copies}: {g} vs {want}")
        })?;
        let closed = closed_form_global(m, copies, d).map_err(err)?;
        ensure((closed - want).abs() <= 1e-14, || {
            format!("closed form {closed} vs {want}")
        })?;
    }
    let x = PureQudit::basis(2, 1).unwrap();
    let g2 = fidelity_global(&clone_pure(&x, 1, 1).map_err(err)?, &x).map_err(err)?;
    ensure((g2 - 2.0 / 3.0).abs() <= TOL, || {
        format!("𝓕(1→2, d=2) = {g2}")
    })?;
    let x = probe_qudit(3);
    let g3 = fidelity_global(&clone_pure(&x, 1, 1).map_err(err)?, &x).map_err(err)?;
    ensure((g3 - 0.5).abs() <= TOL, || format!("𝓕(1→2, d=3) = {g3}"))?;
    Ok(format!("36 grid points, max |Δ𝓕| = {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = seeded(2024);
    let mut widest: f64 = 0.0;
    for (d, m, copies) in grid() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for _ in 0..20 {
            let x = random_pure_qudit(&mut rng, d);
            let out = clone_pure(&x, m, copies - m).map_err(err)?;
            let f = fidelity_single(&single_marginal(&out).map_err(err)?, &x).map_err(err)?;
            lo = lo.min(f);
            hi = hi.max(f);
        }
        widest = widest.max(hi - lo);
        ensure(hi - lo < TOL, || {
            format!("d={d} M={m} L={copies}: spread {}", hi - lo)
        })?;
    }
    Ok(format!("20 qudits × 36 points, max spread = {widest:.2e}"))
}

fn worst_deviation(r: &Report) -> f64 {
    r.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
}

fn criterion_4() -> Outcome {
    let opts = VerifyOptions::default();
    let mut sectors = 0;
    let mut worst: f64 = 0.0;
    for d in 2..=3 {
        for n in 1..=3 {
            for m in 0..=2 {
                for j in enumerate_sector(d, m).map_err(err)?.iter() {
                    let r = verify_ladder(d, n, j, 1.0, &opts).map_err(err)?;
                    let dev = worst_deviation(&r);
                    ensure(r.pass && dev < TOL, || {
                        format!("d={d} N={n} j={j}: {}", r.to_json())
                    })?;
                    ensure(r.check("ladder_elements").is_some(), || {
                        "missing ladder_elements".into()
                    })?;
                    worst = worst.max(dev);
                    sectors += 1;
                }
            }
        }
    }
    Ok(format!("{sectors} sectors, max deviation = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let opts = VerifyOptions::default();
    let mut rng = seeded(55);
    let mut worst: f64 = 0.0;
    for draw in 0..50 {
        let d = rng.random_range(2..=3);
        let n = rng.random_range(1..=3);
        let m = rng.random_range(0..=2);
        let sector = enumerate_sector(d, m).map_err(err)?;
        let j = sector[rng.random_range(0..sector.len())].clone();
        let t = rng.random_range(0.0..10.0);
        let r = verify_evolution(d, n, &j, 1.0, t, &opts).map_err(err)?;
        let dev = r
            .check("evolution_amplitudes")
            .map(|c| c.max_deviation)
            .unwrap_or(f64::INFINITY);
        worst = worst.max(dev);
        ensure(r.pass && dev <= 1e-9, || {
            format!("draw {draw}: {}", r.to_json())
        })?;
    }

    let mut unitarity: f64 = 0.0;
    for d in 2..=4 {
        for n in 1..=8 {
            for m in 0..=4 {
                let h = ladder_matrix(d, n, m, 1.0).map_err(err)?;
                for t in [0.1, 0.77, 3.0, 9.5] {
                    let p = evolve(&h, t).map_err(err)?.total_probability();
                    unitarity = unitarity.max((p - 1.0).abs());
                }
            }
        }
    }
    ensure(unitarity <= TOL, || format!("unitarity error {unitarity}"))?;

    let mut analytic: f64 = 0.0;
    for d in 2..=4 {
        for m in 0..=4 {
            for gamma in [0.5, 1.0, 2.0] {
                let h = ladder_matrix(d, 1, m, gamma).map_err(err)?;
                for t in [0.0, 0.3, 1.1, 4.0] {
                    let p1 = evolve(&h, t).map_err(err)?.probabilities[1];
                    let want = (gamma * ((m + d) as f64).sqrt() * t).sin().powi(2);
                    analytic = analytic.max((p1 - want).abs());
                }
            }
        }
    }
    ensure(analytic <= TOL, || format!("N=1 analytic error {analytic}"))?;
    Ok(format!(
        "50 draws max dev = {worst:.2e}, unitarity = {unitarity:.2e}, N=1 analytic = {analytic:.2e}"
    ))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact squared coefficient of `|j+k⟩_a|k⟩_b` in `|F_l, j⟩`.
fn weight_exact(j: &[usize], k: &[usize]) -> BigRational {
    let d = j.len();
    let m: usize = j.iter().sum();
    let l: usize = k.iter().sum();
    let mut num = factorial(m + d - 1) * factorial(l);
    let mut den = factorial(m + l + d - 1);
    for (&ji, &ki) in j.iter().zip(k) {
        num *= factorial(ki + ji);
        den *= factorial(ki) * factorial(ji);
    }
    BigRational::new(num, den)
}

fn criterion_6() -> Outcome {
    let occ = |v: &[usize]| OccupationVector::new(v.to_vec()).unwrap();
    let out = clone_basis_state(&occ(&[1, 0]), 1).map_err(err)?;
    let terms = out.nonzero_terms();
    ensure(terms.len() == 2, || format!("{} terms", terms.len()))?;
    // ascending: (2,0)⊗(1,0) with 2/3 and (1,1)⊗(0,1) with 1/3
    let two_thirds = BigRational::new(2.into(), 3.into());
    ensure(weight_exact(&[1, 0], &[1, 0]) == two_thirds, || {
        "exact weight of (2,0)⊗(1,0) is not 2/3".into()
    })?;
    ensure(
        weight_exact(&[1, 0], &[0, 1]) == BigRational::one() - &two_thirds,
        || "exact weights do not sum to 1".into(),
    )?;
    for (a, b, k) in [
        (occ(&[2, 0]), occ(&[1, 0]), [1, 0]),
        (occ(&[1, 1]), occ(&[0, 1]), [0, 1]),
    ] {
        let w = weight_exact(&[1, 0], &k).to_f64().unwrap();
        let amp = terms
            .iter()
            .find(|t| t.0 == a && t.1 == b)
            .map(|t| t.2)
            .ok_or("missing term")?;
        ensure((amp.norm_sqr() - w).abs() <= 1e-12, || {
            format!("{a}⊗{b}: {}", amp.norm_sqr())
        })?;
    }

    // Gram matrix of every |F_l, j⟩ for d ≤ 4, |j| ≤ 3, l ≤ 3; states with different
    // (|j|, l) live in different photon-number sectors and are orthogonal by construction
    let mut worst: f64 = 0.0;
    let mut states = 0;
    for d in 2..=4 {
        for m in 0..=3 {
            let inputs = enumerate_sector(d, m).map_err(err)?;
            for l in 0..=3 {
                let emitted = enumerate_sector(d, l).map_err(err)?;
                // amplitudes recomputed term by term; orthogonality follows from a ≠ a′ or b-sum mismatch
                let vecs: Vec<Terms> = inputs
                    .iter()
                    .map(|j| {
                        emitted
                            .iter()
                            .map(|k| {
                                (
                                    j.plus(k).unwrap().counts().to_vec(),
                                    k.counts().to_vec(),
                                    clone_amplitude(j, k).unwrap(),
                                )
                            })
                            .collect()
                    })
                    .collect();
                let produced: Vec<_> = inputs
                    .iter()
                    .map(|j| clone_basis_state(j, l))
                    .collect::<Result<_, _>>()
                    .map_err(err)?;
                for (x, (vx, px)) in vecs.iter().zip(&produced).enumerate() {
                    states += 1;
                    for (y, (vy, py)) in vecs.iter().zip(&produced).enumerate() {
                        let mut ip = 0.0;
                        for (ax, bx, cx) in vx {
                            for (ay, by, cy) in vy {
                                if ax == ay && bx == by {
                                    ip += cx * cy;
                                }
                            }
                        }
                        let produced_ip: Complex64 = px
                            .amplitudes()
                            .unwrap()
                            .iter()
                            .zip(py.amplitudes().unwrap())
                            .map(|(p, q)| p.conj() * q)
                            .sum();
                        let want = if x == y { 1.0 } else { 0.0 };
                        worst = worst
                            .max((ip - want).abs())
                            .max((produced_ip - want).norm());
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("overlap error {worst}"))?;
    Ok(format!(
        "weights (2/3, 1/3); {states} ladder states, max overlap error = {worst:.2e}"
    ))
}

fn criterion_7() -> Outcome {
    let mut worst_res: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for (d, m, copies) in grid() {
        let x = probe_qudit(d);
        let rho_out = single_marginal(&clone_pure(&x, m, copies - m).map_err(err)?).map_err(err)?;
        let fit = shrinking_factor(&SingleQuditDensity::from_pure(&x), &rho_out).map_err(err)?;
        let eta = fit
            .eta()
            .ok_or_else(|| format!("d={d} M={m} L={copies}: {fit:?}"))?;
        worst_res = worst_res.max(fit.residual());
        ensure(fit.residual() < 1e-9, || {
            format!("residual {}", fit.residual())
        })?;
        let f = fidelity_single(&rho_out, &x).map_err(err)?;
        let via_eta = eta + (1.0 - eta) / d as f64;
        worst_f = worst_f.max((f - via_eta).abs());
        ensure((f - via_eta).abs() <= TOL, || {
            format!("d={d} M={m} L={copies}: {f} vs {via_eta}")
        })?;
        let closed = closed_form_single(m, copies, d).map_err(err)?;
        ensure((f - closed).abs() <= TOL, || {
            format!("closed form {closed}")
        })?;
    }
    let x = PureQudit::from_real(&[0.6, 0.8]).unwrap();
    let rho_out = single_marginal(&clone_pure(&x, 1, 1).map_err(err)?).map_err(err)?;
    let eta = shrinking_factor(&SingleQuditDensity::from_pure(&x), &rho_out)
        .map_err(err)?
        .eta()
        .ok_or("not isotropic")?;
    ensure((eta - 2.0 / 3.0).abs() <= TOL, || {
        format!("η(1→2, d=2) = {eta}")
    })?;
    Ok(format!("max residual = {worst_res:.2e}, max |F − (η + (1−η)/d)| = {worst_f:.2e}, η(1→2) = {eta:.12}"))
}

fn criterion_8() -> Outcome {
    let mut rng = seeded(808);
    let mut linearity: f64 = 0.0;
    let mut rank_one: f64 = 0.0;
    for d in 2..=3 {
        for m in 1..=2 {
            for l in 0..=2 {
                for _ in 0..5 {
                    let r1 = random_density(&mut rng, d, m, 1).map_err(err)?;
                    let r2 = random_density(&mut rng, d, m, 3).map_err(err)?;
                    let p: f64 = rng.random_range(0.0..=1.0);
                    let mixed = r1.mix(p, &r2).map_err(err)?;
                    let out = clone_mixed(&mixed, l).map_err(err)?;
                    let rhs = clone_mixed(&r1, l).map_err(err)?.density().scale(p)
                        + clone_mixed(&r2, l).map_err(err)?.density().scale(1.0 - p);
                    let joint = out.density();
                    linearity = linearity.max(max_abs(&(&joint - rhs)));

                    ensure((out.trace() - 1.0).abs() <= 1e-10, || {
                        format!("trace {}", out.trace())
                    })?;
                    ensure(max_abs(&(&joint - joint.adjoint())) <= 1e-12, || {
                        "joint not Hermitian".into()
                    })?;
                    let min_eig = joint.clone().symmetric_eigen().eigenvalues.min();
                    ensure(min_eig >= -1e-10, || format!("joint eigenvalue {min_eig}"))?;
                    // the validating constructors re-check trace, Hermiticity and positivity
                    let rho_l = trace_out_b(&out);
                    SymmetricDensity::new(d, m + l, rho_l.matrix().clone()).map_err(err)?;
                    let one = reduce_to_single(&rho_l).map_err(err)?;
                    SingleQuditDensity::new(one.matrix().clone()).map_err(err)?;
                }
                let x = random_pure_qudit(&mut rng, d);
                let rank1 = SymmetricDensity::from_pure(&expand_identical(&x, m).map_err(err)?);
                let diff = clone_mixed(&rank1, l).map_err(err)?.density()
                    - clone_pure(&x, m, l).map_err(err)?.density();
                rank_one = rank_one.max(max_abs(&diff));
            }
        }
    }
    ensure(linearity <= 1e-12, || {
        format!("linearity error {linearity}")
    })?;
    ensure(rank_one <= 1e-12, || format!("rank-1 error {rank_one}"))?;
    Ok(format!(
        "linearity = {linearity:.2e}, rank-1 vs pure = {rank_one:.2e}"
    ))
}

fn criterion_9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_stimclone");
    let runs: [&[&str]; 3] = [
        &["verify", "--seed", "9"],
        &["verify", "--d", "2", "--n", "2", "--m", "1", "--json"],
        &[
            "fidelity",
            "--d",
            "3",
            "--m",
            "2",
            "--l-max",
            "5",
            "--samples",
            "4",
            "--seed",
            "9",
        ],
    ];
    for args in runs {
        let a = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        let b = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(a.status.success(), || {
            format!("{args:?} exited {:?}", a.status.code())
        })?;
        ensure(a.stdout == b.stdout && a.stderr == b.stderr, || {
            format!("{args:?} output differs")
        })?;
    }
    Ok("verify and fidelity output byte-identical across runs".into())
}

fn main() {
    let start = Instant::now();
    let criteria: [Criterion; 9] = [
        ("single-copy fidelity", criterion_1),
        ("global fidelity", criterion_2),
        ("universality", criterion_3),
        ("ladder correctness", criterion_4),
        ("evolution correctness", criterion_5),
        ("output-state structure", criterion_6),
        ("shrinking-factor consistency", criterion_7),
        ("mixed-input handling", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed < Duration::from_secs(60) {
        println!(
            "criterion 10 PASS  suite runtime: {:.2} s",
            elapsed.as_secs_f64()
        );
    } else {
        failed += 1;
        println!(
            "criterion 10 FAIL  suite runtime: {:.2} s",
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
