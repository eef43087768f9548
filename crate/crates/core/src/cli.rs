//! Command surface: `retrovert {validate|reverse|verify|simulate} <model-file>`.
//!
//! Every command returns an [`Outcome`]; the binary prints it and exits with its code.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::allpass::{CONTINUOUS_GRID_POINTS, DISCRETE_GRID_POINTS};
use crate::error::Error;
use crate::matops::MAX_STATE_DIM;
use crate::model::format::{backward_doc, matrix_rows, BackwardDoc};
use crate::model::{self, ForwardModel, TimeDomain, ValidationReport};
use crate::reversal::{self, ReversalResult};
use crate::simulate::{self, StatReport};
use crate::verify::{self, Conventions, VerifyReport, TOOL_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INVALID_MODEL: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "retrovert",
    version,
    about = "Backward realizations of stationary linear stochastic models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dimensions, stability and reachability.
    Validate { model: PathBuf },
    /// Build the backward realization and its all-pass extension.
    Reverse {
        model: PathBuf,
        /// Also write the document to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the algebraic and frequency-grid checks.
    Verify {
        model: PathBuf,
        /// Boundary grid size; 512 (discrete) or 61 (continuous) when omitted.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = verify::DEFAULT_TOL)]
        tol: f64,
    },
    /// Simulate sample paths and run the statistical checks.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        /// Sampling step; required for continuous models.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 20)]
        lags: usize,
        /// Write the aligned paths as a whitespace-separated table.
        #[arg(long)]
        emit_paths: Option<PathBuf>,
    },
}

/// Exit code plus the text destined for stdout (machine report) and stderr (summary).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn fail(code: i32, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        stderr.push('\n');
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }

    fn from_error(e: &Error) -> Self {
        Self::fail(exit_code(e), format!("error: {e}"))
    }
}

/// Map a library error onto the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Schema(_)
        | Error::Io(_)
        | Error::InvalidArgument(_)
        | Error::StepTooLarge { .. } => EXIT_IO,
        Error::Validation(_)
        | Error::UnstableMatrix { .. }
        | Error::SingularGramian(_)
        | Error::DimensionMismatch(_) => EXIT_INVALID_MODEL,
        Error::NotCoisometric { .. }
        | Error::SingularResolvent { .. }
        | Error::NumericalFailure(_)
        | Error::InsufficientData { .. } => EXIT_CHECK_FAILED,
    }
}

/// Parse arguments and run; usage errors map to exit code 4, help and version to 0.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: EXIT_IO,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_PASS,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { model } => cmd_validate(model),
        Command::Reverse { model, out } => cmd_reverse(model, out.as_deref()),
        Command::Verify { model, grid, tol } => cmd_verify(model, *grid, *tol),
        Command::Simulate {
            model,
            seed,
            steps,
            dt,
            lags,
            emit_paths,
        } => cmd_simulate(model, *seed, *steps, *dt, *lags, emit_paths.as_deref()),
    }
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string(doc).expect("report serializes");
    out.push('\n');
    out
}

fn load(path: &Path) -> Result<ForwardModel, Outcome> {
    let bytes = fs::read(path).map_err(|e| {
        Outcome::fail(
            EXIT_IO,
            format!("error: cannot read {}: {e}", path.display()),
        )
    })?;
    model::parse_model(&bytes)
        .map_err(|e| Outcome::fail(EXIT_IO, format!("error: {}: {e}", path.display())))
}

fn check_size(m: &ForwardModel) -> Result<(), Outcome> {
    if m.states() > MAX_STATE_DIM {
        return Err(Outcome::fail(
            EXIT_INVALID_MODEL,
            format!(
                "error: state dimension {} exceeds {MAX_STATE_DIM}",
                m.states()
            ),
        ));
    }
    Ok(())
}

/// Load, validate and reverse; any failure is already an [`Outcome`].
fn load_reversed(path: &Path) -> Result<ReversalResult, Outcome> {
    let m = load(path)?;
    check_size(&m)?;
    let report = model::validate(&m);
    if !report.pass() {
        return Err(Outcome::fail(
            EXIT_INVALID_MODEL,
            format!(
                "error: model failed validation: {}",
                report.messages.join("; ")
            ),
        ));
    }
    reversal::reverse(&m).map_err(|e| Outcome::from_error(&e))
}

#[derive(Serialize)]
struct ValidateDoc<'a> {
    command: &'static str,
    model: String,
    report: &'a ValidationReport,
    pass: bool,
    tool_version: &'static str,
    conventions: Conventions,
}

pub fn cmd_validate(path: &Path) -> Outcome {
    let m = match load(path) {
        Ok(m) => m,
        Err(o) => return o,
    };
    let report = model::validate(&m);
    let mut pass = report.pass();
    let mut messages = report.messages.clone();
    if m.states() > MAX_STATE_DIM {
        pass = false;
        messages.push(format!(
            "size: state dimension {} exceeds {MAX_STATE_DIM}",
            m.states()
        ));
    }
    let doc = ValidateDoc {
        command: "validate",
        model: path.display().to_string(),
        report: &report,
        pass,
        tool_version: TOOL_VERSION,
        conventions: Conventions::default(),
    };
    let mut stderr = format!(
        "validate {}: {} model, n={} p={} m={}: {}\n",
        path.display(),
        m.time_domain,
        m.states(),
        m.inputs(),
        m.outputs(),
        if pass { "ok" } else { "FAILED" }
    );
    for msg in &messages {
        let _ = writeln!(stderr, "  {msg}");
    }
    Outcome {
        code: if pass { EXIT_PASS } else { EXIT_INVALID_MODEL },
        stdout: to_json(&doc),
        stderr,
    }
}

#[derive(Serialize)]
struct ReverseDoc {
    command: &'static str,
    model: String,
    backward: BackwardDoc,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
    #[serde(rename = "Bbar")]
    bbar: Vec<Vec<f64>>,
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    j: Vec<Vec<f64>>,
    #[serde(rename = "Dbar")]
    dbar: Vec<Vec<f64>>,
    tool_version: &'static str,
    conventions: Conventions,
}

pub fn cmd_reverse(path: &Path, out: Option<&Path>) -> Outcome {
    let r = match load_reversed(path) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let ext = &r.extension;
    let doc = ReverseDoc {
        command: "reverse",
        model: path.display().to_string(),
        backward: backward_doc(&r.backward),
        p: matrix_rows(&ext.gramian.p),
        s: matrix_rows(&ext.gramian.s),
        bbar: matrix_rows(&r.backward.bbar),
        h: matrix_rows(&ext.h),
        j: matrix_rows(&ext.j),
        dbar: matrix_rows(&r.backward.dbar),
        tool_version: TOOL_VERSION,
        conventions: Conventions::default(),
    };
    let text = to_json(&doc);
    if let Some(out) = out {
        if let Err(e) = fs::write(out, &text) {
            return Outcome::fail(
                EXIT_IO,
                format!("error: cannot write {}: {e}", out.display()),
            );
        }
    }
    Outcome {
        code: EXIT_PASS,
        stdout: text,
        stderr: format!(
            "reverse {}: {} backward model, n={} p={}\n",
            path.display(),
            r.backward.time_domain,
            ext.states(),
            ext.inputs()
        ),
    }
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    command: &'static str,
    model: String,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

pub fn cmd_verify(path: &Path, grid: Option<usize>, tol: f64) -> Outcome {
    let r = match load_reversed(path) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let grid = grid.unwrap_or(match r.forward.time_domain {
        TimeDomain::Discrete => DISCRETE_GRID_POINTS,
        TimeDomain::Continuous => CONTINUOUS_GRID_POINTS,
    });
    let report = match verify::verify(&r, grid, tol) {
        Ok(rep) => rep,
        Err(e) => return Outcome::from_error(&e),
    };
    let doc = VerifyDoc {
        command: "verify",
        model: path.display().to_string(),
        report: &report,
    };
    let mut stderr = String::new();
    let _ = writeln!(
        stderr,
        "verify {}: {}",
        path.display(),
        if report.pass { "pass" } else { "FAILED" }
    );
    for (label, v) in [
        ("lyapunov residual", report.lyapunov_residual),
        ("completion orthogonality", report.completion_orthogonality),
        (
            "backward gramian residual",
            report.backward_gramian_residual,
        ),
        ("all-pass deviation", report.allpass_deviation),
        ("factorization deviation", report.factorization_deviation),
    ] {
        let _ = writeln!(stderr, "  {label:<28} {v:.3e} (tol {tol:.1e})");
    }
    let _ = writeln!(
        stderr,
        "  {:<28} {:.3e} (reported only)",
        "with Dbar = D J'", report.factorization_deviation_uncorrected_dbar
    );
    Outcome {
        code: if report.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        },
        stdout: to_json(&doc),
        stderr,
    }
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    command: &'static str,
    model: String,
    #[serde(flatten)]
    report: &'a StatReport,
    tool_version: &'static str,
    conventions: Conventions,
}

pub fn cmd_simulate(
    path: &Path,
    seed: u64,
    steps: usize,
    dt: Option<f64>,
    lags: usize,
    emit_paths: Option<&Path>,
) -> Outcome {
    let r = match load_reversed(path) {
        Ok(r) => r,
        Err(o) => return o,
    };
    if r.forward.time_domain == TimeDomain::Continuous && dt.is_none() {
        return Outcome::fail(EXIT_IO, "error: continuous models need --dt");
    }
    let h = match r.forward.time_domain {
        TimeDomain::Discrete => None,
        TimeDomain::Continuous => dt,
    };
    let (sample, report) = match simulate::run_statistics(&r, seed, steps, h, lags) {
        Ok(v) => v,
        Err(e) => return Outcome::from_error(&e),
    };
    if let Some(out) = emit_paths {
        let written = fs::File::create(out).map_err(Error::from).and_then(|f| {
            simulate::write_path_dump(&sample, BufWriter::new(f)).map_err(Error::from)
        });
        if let Err(e) = written {
            return Outcome::fail(
                EXIT_IO,
                format!("error: cannot write {}: {e}", out.display()),
            );
        }
    }
    let doc = SimulateDoc {
        command: "simulate",
        model: path.display().to_string(),
        report: &report,
        tool_version: TOOL_VERSION,
        conventions: Conventions::default(),
    };
    let t = &report.thresholds;
    let mut stderr = String::new();
    let _ = writeln!(
        stderr,
        "simulate {}: seed {} steps {} step {}: {}",
        path.display(),
        seed,
        steps,
        report.step,
        if report.pass { "pass" } else { "FAILED" }
    );
    if let Some(e) = report.roundtrip_error {
        let _ = writeln!(
            stderr,
            "  {:<28} {e:.3e} (tol {:.1e})",
            "roundtrip error", t.roundtrip
        );
    }
    for (label, v, band) in [
        (
            "dual autocorrelation",
            report.dual_autocorrelation,
            t.autocorrelation,
        ),
        (
            "dual variance deviation",
            report.dual_variance_deviation,
            t.variance,
        ),
        (
            "state covariance error",
            report.state_covariance_error,
            t.covariance,
        ),
        (
            "backward covariance error",
            report.backward_covariance_error,
            t.covariance,
        ),
        (
            "backward orthogonality",
            report.backward_orthogonality,
            t.orthogonality,
        ),
    ] {
        let _ = writeln!(stderr, "  {label:<28} {v:.4} (band {band:.4})");
    }
    if let Some(v) = report.reverse_autocorrelation {
        let _ = writeln!(
            stderr,
            "  {:<28} {v:.4} (band {:.4})",
            "reverse autocorrelation", t.autocorrelation
        );
    }
    Outcome {
        code: if report.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        },
        stdout: to_json(&doc),
        stderr,
    }
}
