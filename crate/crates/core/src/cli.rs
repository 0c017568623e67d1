//! Command-line interface. Exit codes: 0 success or pass, 1 a check failed,
//! 2 usage or input error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::{self, ConstraintReport};
use crate::error::{invalid, Error, Result};
use crate::lorenz::{self, LorenzParams};
use crate::matrix_market;
use crate::mesh::{CellPartition1D, TensorMesh};
use crate::mmatrix::{self, InversePositivityResult};
use crate::operator::assemble;
use crate::solve::{self, PoissonProblem};

#[derive(Debug, Parser)]
#[command(name = "q2mono", version, about = "Q² spectral element Laplacian: assembly, monotonicity certificates and accuracy studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct MeshArgs {
    /// Uniform mesh with M cells per axis
    #[arg(long, value_name = "M")]
    pub uniform: Option<usize>,
    /// Geometric mesh, M cells per axis, consecutive width ratio R
    #[arg(long, value_name = "M:R", value_parser = parse_geometric)]
    pub geometric: Option<(usize, f64)>,
    /// Five-cell mesh whose middle cell is R times wider than the others
    #[arg(long, value_name = "R")]
    pub stretch5: Option<f64>,
    /// Mesh file with `x:` and `y:` lines of cell widths
    #[arg(long, value_name = "PATH")]
    pub mesh_file: Option<PathBuf>,
}

impl MeshArgs {
    pub fn build(&self) -> Result<TensorMesh> {
        if let Some(m) = self.uniform {
            TensorMesh::uniform(m)
        } else if let Some((m, r)) = self.geometric {
            TensorMesh::geometric(m, r)
        } else if let Some(r) = self.stretch5 {
            TensorMesh::stretch5(r)
        } else if let Some(path) = &self.mesh_file {
            fs::read_to_string(path)?.parse()
        } else {
            Err(invalid("no mesh given"))
        }
    }
}

fn parse_geometric(s: &str) -> std::result::Result<(usize, f64), String> {
    let (m, r) = s.split_once(':').ok_or("expected M:R, e.g. 8:1.01")?;
    let m = m.trim().parse().map_err(|e| format!("cell count: {e}"))?;
    let r = r.trim().parse().map_err(|e| format!("ratio: {e}"))?;
    Ok((m, r))
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file (default: stdout)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Local,
    Main,
    Global,
    Q1,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the operator and write it in Matrix Market format
    Assemble {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check the relaxed Lorenz condition and report each hypothesis as JSON
    Certify {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value_t = LorenzParams::default().eps1())]
        eps1: f64,
        #[arg(long, default_value_t = LorenzParams::default().eps2())]
        eps2: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Minimum inverse entry over a range of five-cell stretch ratios, as CSV
    Sweep {
        #[arg(long, default_value = "1.0")]
        start: String,
        #[arg(long, default_value = "6.0")]
        stop: String,
        #[arg(long, default_value = "0.05")]
        step: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// ℓ∞ convergence study on geometric meshes, as CSV
    Converge {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        test: u8,
        #[arg(long, default_value_t = 1.01)]
        ratio: f64,
        #[arg(long, value_delimiter = ',', default_value = "7,15,31,63")]
        sizes: Vec<usize>,
        /// Print errors and orders with full precision
        #[arg(long)]
        full_precision: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check explicit mesh constraints and report as JSON
    Constraints {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, value_enum, default_value_t = Which::Main)]
        which: Which,
        /// ℓ for `--which local`
        #[arg(long, default_value_t = 4.0)]
        ell: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Dense inverse check: minimum entry of the full inverse and of its
    /// interior block, plus the discrete maximum principle verdict
    Oracle {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Whether the command's check passed. Commands without a check always pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(pass: bool) -> Self {
        if pass { Outcome::Pass } else { Outcome::Fail }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

/// Exit code for an error from [`run`].
pub const EXIT_ERROR: i32 = 2;

fn emit(out: &OutArgs, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs one command. The summary line of `assemble` goes to `stderr` when the
/// matrix itself is written to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Assemble { mesh, out } => {
            let a = assemble(&mesh.build()?);
            emit(&out, &matrix_market::to_string(a.matrix()), stdout)?;
            let summary = format!("dim {} nnz {}\n", a.dim(), a.nnz());
            if out.out.is_some() {
                stdout.write_all(summary.as_bytes())?;
            } else {
                stderr.write_all(summary.as_bytes())?;
            }
            Ok(Outcome::Pass)
        }
        Command::Certify { mesh, eps1, eps2, out } => {
            let report = lorenz::certify(&mesh.build()?, LorenzParams::new(eps1, eps2)?)?;
            emit(&out, &to_json(&report)?, stdout)?;
            Ok(Outcome::from_bool(report.passed()))
        }
        Command::Sweep { start, stop, step, out } => {
            let records = sweep(&sweep_ratios(&start, &stop, &step)?)?;
            emit(&out, &sweep_csv(&records), stdout)?;
            Ok(Outcome::Pass)
        }
        Command::Converge { test, ratio, sizes, full_precision, out } => {
            let rows = solve::convergence_study(&PoissonProblem::benchmark(test)?, &sizes, ratio)?;
            emit(&out, &solve::convergence_csv(&rows, full_precision), stdout)?;
            Ok(Outcome::Pass)
        }
        Command::Constraints { mesh, which, ell, out } => {
            let mesh = mesh.build()?;
            let report: ConstraintReport = match which {
                Which::Local => constraints::check_local(&mesh, ell)?,
                Which::Main => constraints::check_main(&mesh),
                Which::Global => constraints::check_global_ratio(&mesh),
                Which::Q1 => constraints::check_q1(&mesh),
            };
            emit(&out, &to_json(&report)?, stdout)?;
            Ok(Outcome::from_bool(report.pass))
        }
        Command::Oracle { mesh, out } => {
            let a = assemble(&mesh.build()?);
            let report = OracleReport {
                full: mmatrix::inverse_min_entry(a.matrix())?,
                interior: mmatrix::inverse_min_entry_on(a.matrix(), &a.shape().interior_mask())?,
                dmp: mmatrix::dmp_verdict(a.matrix())?,
            };
            emit(&out, &to_json(&report)?, stdout)?;
            Ok(Outcome::from_bool(report.full.is_nonnegative))
        }
    }
}

#[derive(Debug, Serialize)]
struct OracleReport {
    full: InversePositivityResult,
    interior: InversePositivityResult,
    dmp: bool,
}

/// A decimal literal as `mantissa / 10^scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal {
    pub mantissa: i64,
    pub scale: u32,
}

impl Decimal {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
        if (int.is_empty() && frac.is_empty()) || !digits_ok(int) || !digits_ok(frac) {
            return Err(invalid(format!("not a decimal literal: {s:?}")));
        }
        let all = format!("{int}{frac}");
        let mantissa: i64 = if all.is_empty() { 0 } else { all.parse().map_err(|_| invalid(format!("decimal out of range: {s:?}")))? };
        Ok(Self {
            mantissa: if neg { -mantissa } else { mantissa },
            scale: frac.len() as u32,
        })
    }

    fn rescaled(self, scale: u32) -> Result<i64> {
        10_i64
            .checked_pow(scale - self.scale)
            .and_then(|p| self.mantissa.checked_mul(p))
            .ok_or_else(|| invalid("decimal out of range"))
    }
}

/// One sweep point; the ratio is kept as an exact decimal for printing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRatio {
    pub numerator: i64,
    pub scale: u32,
}

impl SweepRatio {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / 10_f64.powi(self.scale as i32)
    }

    pub fn label(&self) -> String {
        let p = 10_i64.pow(self.scale);
        if self.scale == 0 {
            format!("{}", self.numerator)
        } else {
            format!("{}.{:0width$}", self.numerator / p, self.numerator % p, width = self.scale as usize)
        }
    }
}

/// `start, start + step, …` up to and including `stop`, computed exactly.
pub fn sweep_ratios(start: &str, stop: &str, step: &str) -> Result<Vec<SweepRatio>> {
    let (a, b, h) = (Decimal::parse(start)?, Decimal::parse(stop)?, Decimal::parse(step)?);
    let scale = a.scale.max(b.scale).max(h.scale);
    let (a, b, h) = (a.rescaled(scale)?, b.rescaled(scale)?, h.rescaled(scale)?);
    let one = 10_i64.pow(scale);
    if a < one {
        return Err(Error::OutOfRange(format!("start must be >= 1, got {start}")));
    }
    if h <= 0 {
        return Err(Error::OutOfRange(format!("step must be > 0, got {step}")));
    }
    if b < a {
        return Err(Error::OutOfRange(format!("stop {stop} is below start {start}")));
    }
    Ok((0..=(b - a) / h)
        .map(|k| SweepRatio { numerator: a + k * h, scale })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub ratio: SweepRatio,
    /// Minimum over the interior block of the inverse.
    pub min_inverse_entry: f64,
    /// Minimum over the whole inverse, boundary rows and columns included.
    pub full_min_inverse_entry: f64,
    pub monotone: bool,
}

/// Evaluates every ratio (in parallel) and returns records in input order.
pub fn sweep(ratios: &[SweepRatio]) -> Result<Vec<SweepRecord>> {
    ratios
        .par_iter()
        .map(|&ratio| {
            let mesh = TensorMesh::square(CellPartition1D::stretch5(ratio.value())?);
            let a = assemble(&mesh);
            let interior = mmatrix::inverse_min_entry_on(a.matrix(), &a.shape().interior_mask())?;
            let full = mmatrix::inverse_min_entry(a.matrix())?;
            Ok(SweepRecord {
                ratio,
                min_inverse_entry: interior.min_entry,
                full_min_inverse_entry: full.min_entry,
                monotone: interior.is_nonnegative,
            })
        })
        .collect()
}

pub fn first_non_monotone(records: &[SweepRecord]) -> Option<&SweepRecord> {
    records.iter().find(|r| !r.monotone)
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from("ratio,min_inverse_entry,full_min_inverse_entry,monotone\n");
    for r in records {
        s.push_str(&format!(
            "{},{:.6e},{:.6e},{}\n",
            r.ratio.label(),
            r.min_inverse_entry,
            r.full_min_inverse_entry,
            r.monotone
        ));
    }
    match first_non_monotone(records) {
        Some(r) => s.push_str(&format!("# first non-monotone ratio: {}\n", r.ratio.label())),
        None => s.push_str("# first non-monotone ratio: none\n"),
    }
    s
}
