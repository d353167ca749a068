//! Command-line driver: fidelity tables, emission profiles, cloning runs and
//! oracle verification.
//!
//! Machine formats (`csv`, `json`) print every float with round-trip
//! precision; `table` rounds to six digits for reading.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::cloner::{clone_basis_state, clone_pure, CloneOutput, PureQudit};
use crate::error::Error;
use crate::fock::OccupationVector;
use crate::ladder::{evolve, ladder_matrix};
use crate::oracle::{verify_suite, Report, SuiteConfig, VerifyOptions};
use crate::reduction::{
    closed_form_global, closed_form_single, fidelity_global, fidelity_single, single_marginal,
};
use crate::sampling::{random_pure_qudit, seeded, DEFAULT_SEED};

/// Largest simulated-vs-closed-form gap tolerated by `fidelity`.
pub const FIDELITY_TOL: f64 = 1e-9;

const MAX_GRID_D: usize = 6;
const MAX_GRID_M: usize = 6;
const MAX_GRID_L: usize = 12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "stimclone",
    version,
    about = "Universal quantum cloning by stimulated emission"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulated vs closed-form single-copy and global fidelities for L = M … l-max.
    Fidelity(FidelityArgs),
    /// Emission probabilities |f_l(τ)|² on the ladder.
    Evolve(EvolveArgs),
    /// Joint output state, one-qudit marginal and fidelities for one run.
    Clone(CloneArgs),
    /// Brute-force Fock-space verification of the ladder and its dynamics.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long)]
    pub json: bool,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Args, Debug)]
pub struct FidelityArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Largest number of output copies L.
    #[arg(long = "l-max")]
    pub l_max: usize,
    /// Random pure qudits sampled per row.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Input photon number M.
    #[arg(long, conflicts_with = "j")]
    pub m: Option<usize>,
    /// Input occupation vector; only its total matters.
    #[arg(long)]
    pub j: Option<OccupationVector>,
    /// Number of excited atoms N.
    #[arg(long)]
    pub n: usize,
    /// Dimensionless time τ = γt.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CloneArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Occupation-basis input, e.g. `1,0`.
    #[arg(long, conflicts_with_all = ["x", "m"])]
    pub j: Option<OccupationVector>,
    /// Pure qudit, comma-separated `re+imi` entries.
    #[arg(long, requires = "m")]
    pub x: Option<PureQudit>,
    /// Number of identical input copies of `--x`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of emitted photons l.
    #[arg(long)]
    pub l: usize,
    /// Excited atoms; with `--tau`, reports the probability of this l.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Largest qudit dimension checked.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Largest number of excited atoms checked.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Largest input photon number checked.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Random evolution times per sector.
    #[arg(long, default_value_t = 2)]
    pub times: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Shift every ladder coupling by this amount before comparing (negative control).
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub inject_perturbation: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `stdout` (or `--out`) and diagnostics to `stderr`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

fn dispatch(
    cmd: &Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let (output, doc) = match cmd {
        Command::Fidelity(a) => (&a.output, cmd_fidelity(a, stderr)?),
        Command::Evolve(a) => (&a.output, cmd_evolve(a)?),
        Command::Clone(a) => (&a.output, cmd_clone(a)?),
        Command::Verify(a) => (&a.output, cmd_verify(a, stderr)?),
    };
    match &output.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            doc.render(output.format(), &mut file)?;
            file.flush()?;
        }
        None => doc.render(output.format(), stdout)?,
    }
    Ok(doc.exit_code)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Float(v) if v.abs() < 1e-6 && *v != 0.0 => format!("{v:.3e}"),
            Cell::Float(v) => format!("{v:.6}"),
            other => other.csv(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Null => Value::Null,
        }
    }
}

/// Shortest round-trip representation, spelled exactly as in the JSON output.
fn format_float(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else {
        v.to_string()
    }
}

/// A rendered command result: one table plus parameters, or a prebuilt JSON
/// document for formats that need nesting.
pub struct Document {
    params: Value,
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    json: Option<Value>,
    exit_code: i32,
}

impl Document {
    fn render(&self, format: Format, w: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut writer = csv::Writer::from_writer(w);
                writer.write_record(&self.headers)?;
                for row in &self.rows {
                    writer.write_record(row.iter().map(Cell::csv))?;
                }
                writer.flush()?;
            }
            Format::Json => {
                let doc = self.json.clone().unwrap_or_else(|| {
                    let rows: Vec<Value> = self
                        .rows
                        .iter()
                        .map(|row| {
                            let obj: Map<String, Value> = self
                                .headers
                                .iter()
                                .zip(row)
                                .map(|(h, c)| (h.to_string(), c.json()))
                                .collect();
                            Value::Object(obj)
                        })
                        .collect();
                    json!({ "params": self.params, "rows": rows })
                });
                serde_json::to_writer_pretty(&mut *w, &doc).map_err(io::Error::other)?;
                writeln!(w)?;
            }
            Format::Table => {
                let cells: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|r| r.iter().map(Cell::human).collect())
                    .collect();
                let widths: Vec<usize> = (0..self.headers.len())
                    .map(|c| {
                        cells
                            .iter()
                            .map(|r| r[c].len())
                            .chain([self.headers[c].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |w: &mut dyn Write, items: Vec<&str>| -> io::Result<()> {
                    let padded: Vec<String> = items
                        .iter()
                        .zip(&widths)
                        .map(|(s, n)| format!("{s:>n$}"))
                        .collect();
                    writeln!(w, "{}", padded.join("  ").trim_end())
                };
                line(w, self.headers.clone())?;
                for r in &cells {
                    line(w, r.iter().map(String::as_str).collect())?;
                }
            }
        }
        Ok(())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn cmd_fidelity(a: &FidelityArgs, stderr: &mut dyn Write) -> Result<Document, CliError> {
    if !(2..=MAX_GRID_D).contains(&a.d) {
        return Err(usage(format!("--d must lie in 2..={MAX_GRID_D}")));
    }
    if !(1..=MAX_GRID_M).contains(&a.m) {
        return Err(usage(format!("--m must lie in 1..={MAX_GRID_M}")));
    }
    if a.l_max < a.m || a.l_max > MAX_GRID_L {
        return Err(usage(format!("--l-max must lie in {}..={MAX_GRID_L}", a.m)));
    }
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    writeln!(stderr, "seed = {}", a.seed)?;
    let mut rng = seeded(a.seed);
    let qudits: Vec<PureQudit> = (0..a.samples)
        .map(|_| random_pure_qudit(&mut rng, a.d))
        .collect();

    let mut rows = Vec::new();
    let mut exit_code = EXIT_OK;
    for copies in a.m..=a.l_max {
        let single_closed = closed_form_single(a.m, copies, a.d)?;
        let global_closed = closed_form_global(a.m, copies, a.d)?;
        let mut single_sim = f64::NAN;
        let mut global_sim = f64::NAN;
        let mut diff: f64 = 0.0;
        for (i, x) in qudits.iter().enumerate() {
            let out = clone_pure(x, a.m, copies - a.m)?;
            let single = fidelity_single(&single_marginal(&out)?, x)?;
            let global = fidelity_global(&out, x)?;
            if i == 0 {
                single_sim = single;
                global_sim = global;
            }
            diff = diff
                .max((single - single_closed).abs())
                .max((global - global_closed).abs());
        }
        if diff.is_nan() || diff > FIDELITY_TOL {
            exit_code = EXIT_CHECK_FAILED;
        }
        rows.push(vec![
            Cell::Int(a.d as i64),
            Cell::Int(a.m as i64),
            Cell::Int(copies as i64),
            Cell::Float(single_sim),
            Cell::Float(single_closed),
            Cell::Float(global_sim),
            Cell::Float(global_closed),
            Cell::Float(diff),
        ]);
    }
    Ok(Document {
        params: json!({ "d": a.d, "m": a.m, "l_max": a.l_max, "samples": a.samples, "seed": a.seed, "tolerance": FIDELITY_TOL }),
        headers: vec![
            "d",
            "M",
            "L",
            "f_single_simulated",
            "f_single_closed",
            "f_global_simulated",
            "f_global_closed",
            "max_abs_diff",
        ],
        rows,
        json: None,
        exit_code,
    })
}

fn cmd_evolve(a: &EvolveArgs) -> Result<Document, CliError> {
    let photons = match (&a.j, a.m) {
        (Some(j), _) => {
            if j.dim() != a.d {
                return Err(usage(format!(
                    "--j has {} modes but --d is {}",
                    j.dim(),
                    a.d
                )));
            }
            j.total()
        }
        (None, Some(m)) => m,
        (None, None) => return Err(usage("one of --m or --j is required")),
    };
    let h = ladder_matrix(a.d, a.n, photons, 1.0)?;
    let profile = evolve(&h, a.tau)?;
    let rows = profile
        .amplitudes
        .iter()
        .zip(&profile.probabilities)
        .enumerate()
        .map(|(l, (f, p))| {
            vec![
                Cell::Int(l as i64),
                Cell::Float(*p),
                Cell::Float(f.re),
                Cell::Float(f.im),
            ]
        })
        .collect();
    Ok(Document {
        params: json!({ "d": a.d, "m": photons, "n": a.n, "tau": a.tau }),
        headers: vec!["l", "probability", "amplitude_re", "amplitude_im"],
        rows,
        json: None,
        exit_code: EXIT_OK,
    })
}

fn cmd_clone(a: &CloneArgs) -> Result<Document, CliError> {
    // the pure qudit a fidelity refers to, if the input is a product state
    let (out, reference): (CloneOutput, Option<PureQudit>) = match (&a.j, &a.x, a.m) {
        (Some(j), _, _) => {
            if j.dim() != a.d {
                return Err(usage(format!(
                    "--j has {} modes but --d is {}",
                    j.dim(),
                    a.d
                )));
            }
            let out = clone_basis_state(j, a.l)?;
            let reference = match (j.support(), j.iter().position(|n| n > 0)) {
                (1, Some(mode)) => Some(PureQudit::basis(a.d, mode)?),
                _ => None,
            };
            (out, reference)
        }
        (None, Some(x), Some(m)) => {
            if x.dim() != a.d {
                return Err(usage(format!(
                    "--x has {} entries but --d is {}",
                    x.dim(),
                    a.d
                )));
            }
            (clone_pure(x, m, a.l)?, Some(x.clone()))
        }
        _ => return Err(usage("give either --j, or --x together with --m")),
    };
    let out = match a.n {
        Some(n) => out.with_excited(n),
        None => out,
    };
    let probability = match a.n {
        Some(n) if a.l > n => Some(0.0),
        Some(n) => {
            Some(evolve(&ladder_matrix(a.d, n, out.photons(), 1.0)?, a.tau)?.probabilities[a.l])
        }
        None => None,
    };
    let copies = out.copies();
    let reduced = if copies > 0 {
        Some(single_marginal(&out)?)
    } else {
        None
    };
    let (f_single, f_global) = match (&reference, &reduced) {
        (Some(x), Some(rho)) => (
            Some(fidelity_single(rho, x)?),
            Some(fidelity_global(&out, x)?),
        ),
        _ => (None, None),
    };

    let terms = out.nonzero_terms();
    let mut rows: Vec<Vec<Cell>> = terms
        .iter()
        .map(|(a_occ, b_occ, c)| {
            vec![
                Cell::Text("amplitude".into()),
                Cell::Text(a_occ.to_string()),
                Cell::Text(b_occ.to_string()),
                Cell::Float(c.re),
                Cell::Float(c.im),
            ]
        })
        .collect();
    if let Some(rho) = &reduced {
        for r in 0..rho.dim() {
            for s in 0..rho.dim() {
                let v = rho.matrix()[(r, s)];
                rows.push(vec![
                    Cell::Text("reduced".into()),
                    Cell::Int(r as i64),
                    Cell::Int(s as i64),
                    Cell::Float(v.re),
                    Cell::Float(v.im),
                ]);
            }
        }
    }
    let scalar = |name: &str, v: Option<f64>| {
        vec![
            Cell::Text(name.into()),
            Cell::Null,
            Cell::Null,
            v.map_or(Cell::Null, Cell::Float),
            Cell::Null,
        ]
    };
    rows.push(scalar("fidelity_single", f_single));
    rows.push(scalar("fidelity_global", f_global));
    if probability.is_some() {
        rows.push(scalar("probability", probability));
    }

    let params = json!({
        "d": a.d,
        "m": out.photons(),
        "l": a.l,
        "copies": copies,
        "n": a.n,
        "tau": a.tau,
        "j": a.j.as_ref().map(|j| j.counts().to_vec()),
        "x": a.x.as_ref().map(|x| x.amplitudes().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()),
    });
    let doc = json!({
        "params": params,
        "terms": terms.iter().map(|(a_occ, b_occ, c)| json!({
            "a": a_occ.counts(), "b": b_occ.counts(), "re": c.re, "im": c.im,
        })).collect::<Vec<_>>(),
        "reduced": reduced.as_ref().map(|rho| (0..rho.dim()).map(|r| (0..rho.dim()).map(|s| {
            let v = rho.matrix()[(r, s)];
            [v.re, v.im]
        }).collect::<Vec<_>>()).collect::<Vec<_>>()),
        "fidelity_single": f_single,
        "fidelity_global": f_global,
        "probability": probability,
    });
    Ok(Document {
        params,
        headers: vec!["record", "a", "b", "re", "im"],
        rows,
        json: Some(doc),
        exit_code: EXIT_OK,
    })
}

fn cmd_verify(a: &VerifyArgs, stderr: &mut dyn Write) -> Result<Document, CliError> {
    if a.d < 2 {
        return Err(usage("--d must be at least 2"));
    }
    if a.n < 1 {
        return Err(usage("--n must be at least 1"));
    }
    writeln!(stderr, "seed = {}", a.seed)?;
    let cfg = SuiteConfig {
        max_d: a.d,
        max_excited: a.n,
        max_photons: a.m,
        times_per_sector: a.times,
        seed: a.seed,
        options: VerifyOptions {
            perturbation: a.inject_perturbation,
            ..Default::default()
        },
        ..Default::default()
    };
    let report: Report = verify_suite(&cfg)?;
    let rows = report
        .checks
        .iter()
        .map(|c| {
            vec![
                Cell::Text(c.name.clone()),
                Cell::Float(c.max_deviation),
                Cell::Float(c.tolerance),
                Cell::Bool(c.pass),
            ]
        })
        .collect();
    Ok(Document {
        params: report.params.clone(),
        headers: vec!["name", "max_deviation", "tolerance", "pass"],
        rows,
        json: Some(serde_json::to_value(&report).map_err(io::Error::other)?),
        exit_code: if report.pass {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
    })
}
