//! The `opuc` command line: case files in, JSON reports and CSV grids out.
//!
//! Exit codes: 0 success, 1 unreadable or invalid input, 2 roots too close
//! to the unit circle to classify, 3 a verification tolerance was not met,
//! 4 any other numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    self, AnalysisError, ComplexValue, Khrushchev, MomentReport, Pole, QuadOptions, SzegoReport, TraceRow,
};
use crate::poly::{Complex, ComplexPoly};
use crate::schur::{self, CaratheodoryModel, SchurError, Termination};
use crate::verblunsky::{SequenceError, VerblunskySequence, DEFAULT_GUARD_UNIT};

pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;

fn default_guard() -> f64 {
    DEFAULT_GUARD_UNIT
}

/// One verification case. `guard_unit` is both the rejection band around
/// the unit circle for coefficients and the classification band for roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFile {
    pub alphas: Vec<ComplexValue>,
    #[serde(default = "default_guard")]
    pub guard_unit: f64,
    #[serde(default)]
    pub quad: QuadOptions,
    #[serde(default)]
    pub label: String,
}

impl CaseFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn sequence(&self) -> Result<VerblunskySequence, CliError> {
        let alphas = self.alphas.iter().map(|&a| Complex::from(a)).collect();
        VerblunskySequence::with_guard(alphas, self.guard_unit).map_err(|e| CliError::Input(e.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Ambiguous(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Ambiguous(_) => 2,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Ambiguous(_) => CliError::Ambiguous(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SchurError> for CliError {
    fn from(e: SchurError) -> Self {
        match e {
            SchurError::Sequence(SequenceError::OnUnitCircle { .. }) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "opuc", version, about = "Szego-type identities for nonclassical Verblunsky sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Case file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Overrides `guard_unit`.
    #[arg(long)]
    pub guard: Option<f64>,
    /// Overrides `quad.tol`.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// Overrides `quad.max_points`.
    #[arg(long)]
    pub max_points: Option<usize>,
}

impl CaseArgs {
    fn load(&self) -> Result<(CaseFile, VerblunskySequence), CliError> {
        let mut case = CaseFile::read(&self.input)?;
        if let Some(g) = self.guard {
            case.guard_unit = g;
        }
        if let Some(t) = self.quad_tol {
            case.quad.tol = t;
        }
        if let Some(m) = self.max_points {
            case.quad.max_points = m;
        }
        let seq = case.sequence()?;
        Ok((case, seq))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Szego identity; exit 0 iff the relative error is below --tol.
    Verify {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
        tol: f64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re F on an equispaced circle grid, directly and by Khrushchev's formula.
    Grid {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Poles of F in the disk with multiplicities.
    Poles {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coefficients of Phi_n, Phi_n^*, Psi_n, Psi_n^*.
    Polys {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moments c_1..c_J and their growth rate.
    Moments {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        order: usize,
        /// Polynomial index; defaults to the stored length.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verblunsky coefficients of a rational F = num / den.
    Recover {
        /// Numerator coefficients, lowest degree first (`1,-2,0.5+1i`).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        num: Vec<Complex>,
        /// Denominator coefficients, lowest degree first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        den: Vec<Complex>,
        #[arg(long)]
        max_n: usize,
        #[arg(long, default_value_t = DEFAULT_GUARD_UNIT)]
        guard: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predicted and actual zero counts of Phi_k and Phi_k^* in the disk.
    Trace {
        #[command(flatten)]
        case: CaseArgs,
        /// Last index; defaults to the stored length.
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify every `*.json` case in a directory.
    Batch {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub label: String,
    pub tol: f64,
    pub passed: bool,
    #[serde(flatten)]
    pub report: SzegoReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolesOutput {
    pub label: String,
    pub poles: Vec<Pole>,
    pub phi_star_zeros: usize,
    pub classical_start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolysOutput {
    pub label: String,
    pub n: usize,
    pub phi: Vec<ComplexValue>,
    pub phi_star: Vec<ComplexValue>,
    pub psi: Vec<ComplexValue>,
    pub psi_star: Vec<ComplexValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsOutput {
    pub label: String,
    #[serde(flatten)]
    pub report: MomentReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationOutput {
    UnitModulus { index: usize, alpha: ComplexValue },
    PoleAtZero { index: usize },
}

impl From<Termination> for TerminationOutput {
    fn from(t: Termination) -> Self {
        match t {
            Termination::UnitModulus { index, alpha } => Self::UnitModulus { index, alpha: alpha.into() },
            Termination::PoleAtZero { index } => Self::PoleAtZero { index },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverOutput {
    pub alphas: Vec<ComplexValue>,
    pub termination: Option<TerminationOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOutput {
    pub label: String,
    pub rows: Vec<TraceRow>,
    pub all_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchCase {
    pub file: String,
    pub label: String,
    pub passed: bool,
    pub rel_error: Option<f64>,
    pub error: Option<String>,
    pub exit_code: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub pass: usize,
    pub fail: usize,
    pub worst_rel_error: Option<f64>,
    pub cases: Vec<BatchCase>,
}

fn coeff_values(p: &ComplexPoly, degree: usize) -> Vec<ComplexValue> {
    (0..=degree).map(|k| p.coeff(k).into()).collect()
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => writeln!(stdout, "{text}").map_err(|e| CliError::Input(e.to_string())),
    }
}

pub fn verify_case(case: &CaseFile, seq: &VerblunskySequence, tol: f64) -> Result<VerifyOutput, CliError> {
    let report = analysis::szego_verify(seq, case.quad, case.guard_unit)?;
    Ok(VerifyOutput { label: case.label.clone(), tol, passed: report.rel_error < tol, report })
}

/// CSV rows `theta,reF_direct,reF_khrushchev,abs_diff` at `theta_k = 2 pi k / points`.
pub fn grid_csv(seq: &VerblunskySequence, points: usize) -> Result<String, CliError> {
    let model = CaratheodoryModel::new(seq)?;
    let k = Khrushchev::new(seq, seq.classical_start())?;
    let mut csv = String::from("theta,reF_direct,reF_khrushchev,abs_diff\n");
    for j in 0..points {
        let theta = std::f64::consts::TAU * j as f64 / points as f64;
        let direct = model.eval_caratheodory(Complex::from_polar(1.0, theta))?.re;
        let formula = k.re_f(theta)?;
        csv.push_str(&format!("{theta},{direct},{formula},{}\n", (direct - formula).abs()));
    }
    Ok(csv)
}

pub fn recover(num: &[Complex], den: &[Complex], max_n: usize, guard: f64) -> Result<RecoverOutput, CliError> {
    let r = schur::recover_from_parts(ComplexPoly::new(num.to_vec()), ComplexPoly::new(den.to_vec()), max_n, guard)
        .map_err(|e| match e {
            SchurError::ZeroDenominator | SchurError::VanishingAtZero => CliError::Input(e.to_string()),
            other => CliError::from(other),
        })?;
    Ok(RecoverOutput {
        alphas: r.alphas.iter().map(|&a| a.into()).collect(),
        termination: r.termination.map(Into::into),
    })
}

fn batch_one(path: &Path, tol: f64) -> (BatchCase, Result<VerifyOutput, CliError>) {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let result = CaseFile::read(path).and_then(|case| {
        let seq = case.sequence()?;
        verify_case(&case, &seq, tol)
    });
    let case = match &result {
        Ok(v) => BatchCase {
            file,
            label: v.label.clone(),
            passed: v.passed,
            rel_error: Some(v.report.rel_error),
            error: None,
            exit_code: if v.passed { 0 } else { 3 },
        },
        Err(e) => BatchCase {
            file,
            label: String::new(),
            passed: false,
            rel_error: None,
            error: Some(e.to_string()),
            exit_code: e.exit_code(),
        },
    };
    (case, result)
}

pub fn batch(dir: &Path, out: &Path, jobs: usize, tol: f64) -> Result<BatchSummary, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let results: Vec<_> = pool.install(|| paths.par_iter().map(|p| batch_one(p, tol)).collect());

    fs::create_dir_all(out).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    let mut cases = Vec::with_capacity(results.len());
    for (case, result) in results {
        let stem = Path::new(&case.file).file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let target = out.join(format!("{stem}.report.json"));
        match &result {
            Ok(v) => emit(v, Some(&target), &mut std::io::sink())?,
            Err(_) => emit(&case, Some(&target), &mut std::io::sink())?,
        }
        cases.push(case);
    }
    let pass = cases.iter().filter(|c| c.passed).count();
    let worst_rel_error = cases.iter().filter_map(|c| c.rel_error).reduce(f64::max);
    let summary = BatchSummary { pass, fail: cases.len() - pass, worst_rel_error, cases };
    emit(&summary, Some(&out.join("summary.json")), &mut std::io::sink())?;
    Ok(summary)
}

/// Runs one command, writing reports to `stdout` unless redirected to a
/// file. Returns the process exit code.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<u8, CliError> {
    match cli.command {
        Command::Verify { case, tol, out } => {
            let (case, seq) = case.load()?;
            let v = verify_case(&case, &seq, tol)?;
            emit(&v, out.as_deref(), stdout)?;
            Ok(if v.passed { 0 } else { 3 })
        }
        Command::Grid { case, points, csv } => {
            let (_, seq) = case.load()?;
            let text = grid_csv(&seq, points)?;
            match csv {
                Some(path) => fs::write(&path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
                None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Input(e.to_string()))?,
            }
            Ok(0)
        }
        Command::Poles { case, out } => {
            let (case, seq) = case.load()?;
            let p = analysis::pole_set(&seq, case.guard_unit)?;
            let v = PolesOutput {
                label: case.label,
                poles: p.poles,
                phi_star_zeros: p.phi_star_zeros,
                classical_start: seq.classical_start(),
            };
            emit(&v, out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Polys { case, n, out } => {
            let (case, seq) = case.load()?;
            let phi = seq.szego_polys(n);
            let psi = seq.second_kind_polys(n);
            let v = PolysOutput {
                label: case.label,
                n,
                phi: coeff_values(&phi.poly, n),
                phi_star: coeff_values(&phi.reversed, n),
                psi: coeff_values(&psi.poly, n),
                psi_star: coeff_values(&psi.reversed, n),
            };
            emit(&v, out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Moments { case, order, m, out } => {
            let (case, seq) = case.load()?;
            let report = analysis::moments(&seq, m.unwrap_or(seq.len()), order, case.guard_unit)?;
            emit(&MomentsOutput { label: case.label, report }, out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Recover { num, den, max_n, guard, out } => {
            let v = recover(&num, &den, max_n, guard)?;
            emit(&v, out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Trace { case, n_max, out } => {
            let (case, seq) = case.load()?;
            let rows = analysis::zero_count_trace(&seq, n_max.unwrap_or(seq.len()), case.guard_unit)?;
            let all_match = rows.iter().all(TraceRow::matches);
            emit(&TraceOutput { label: case.label, rows, all_match }, out.as_deref(), stdout)?;
            Ok(if all_match { 0 } else { 3 })
        }
        Command::Batch { dir, out, jobs, tol } => {
            let summary = batch(&dir, &out, jobs, tol)?;
            emit(&summary, None, stdout)?;
            Ok(if summary.fail == 0 { 0 } else { 3 })
        }
    }
}

/// Parses `std::env::args`, runs, and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
