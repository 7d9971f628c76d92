//! Command-line verification harness.
//!
//! [`run`] parses argv, dispatches one subcommand and writes a JSON or CSV
//! report. Exit codes: 0 success, 1 usage error, 2 numerical error.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

pub mod commands;
pub mod config;
pub mod output;

use output::{write_json, Envelope, Table, SCHEMA_VERSION};

/// Bad arguments or configuration; always carries a one-line message.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> Self {
        UsageError(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Printed,
    Robust,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "triosc",
    version,
    about = "Spectrum, rotation and dynamics checks for three coupled oscillators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Batch size (subcommand-specific default).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Tolerance; meaning depends on the subcommand (see its --help).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Spectrum formula for `eig`.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Oscillator-system JSON; matrix subcommands use Γ(t0) when --matrix is absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form spectrum against the Jacobi oracle.
    #[command(after_help = "--tol: Jacobi tolerance (default 1e-14).\n\
CSV columns: source,index,value,abs_dev_vs_jacobi")]
    Eig {
        /// Rows separated by ';', entries by ','; must be exactly symmetric.
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Generator algebra, adjoint orthogonality and the printed composition.
    #[command(after_help = "--samples: angle triples (default 10000).\n\
--tol: adjoint orthogonality threshold (default 1e-12).\n\
CSV columns: metric,value")]
    VerifyRotation {
        /// Probe angles phi,theta,psi.
        #[arg(long, default_value = "0.3,0.4,0.5", allow_hyphen_values = true)]
        angles: String,
    },
    /// Expanded M_ij coefficients against the conjugation products.
    #[command(
        after_help = "Without --matrix/--config: batch audit over --samples (default 10000).\n\
--tol: confirmation factor on 1+|G|_F (default 1e-12).\n\
CSV columns (batch): row,col,status,matches,max_rel_dev,max_abs_dev,max_rel_dev_rt_g_r,max_rel_dev_r_g_rt,confirmed_samples\n\
CSV columns (single): row,col,printed,rt_g_r,r_g_rt,dev_rt_g_r,confirmed"
    )]
    VerifyMij {
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        angles: Option<String>,
    },
    /// Euler-angle diagonalization by multi-start simplex.
    #[command(
        after_help = "Without --matrix/--config: batch over --samples (default 1000) with entries in [-range, range].\n\
--tol: success factor on |G|_F (default 1e-8).\n\
CSV columns: metric,value"
    )]
    EulerFit {
        #[arg(long)]
        matrix: Option<String>,
        /// Random restarts per fit.
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// Skip the start seeded from the Jacobi eigenvectors.
        #[arg(long)]
        no_oracle_seed: bool,
        #[arg(long, default_value_t = 10.0)]
        range: f64,
    },
    /// Coupling-only modal basis and transform.
    #[command(
        after_help = "CSV columns: vector,c1,c2,c3,lambda,eig_residual,norm_residual_printed,norm_residual_alt"
    )]
    Modal {
        #[arg(long)]
        matrix: Option<String>,
    },
    /// RK4 trajectory of the configured system (requires --config).
    #[command(
        after_help = "CSV columns: t,x1,x2,x3,p1,p2,p3,energy (plus D with --compare-decoupling)"
    )]
    Simulate {
        /// Also run the naive decoupled integration and emit D(t).
        #[arg(long)]
        compare_decoupling: bool,
    },
    /// Every batch check at --samples (default 1000) with pass flags.
    #[command(after_help = "CSV columns: metric,value")]
    Report,
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Option<Value>,
    pub table: Table,
    /// Numerical failure; partial results may still be present.
    pub error: Option<triosc::Error>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Numeric(triosc::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<triosc::Error> for Failure {
    fn from(e: triosc::Error) -> Self {
        Failure::Numeric(e)
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eig { .. } => "eig",
        Command::VerifyRotation { .. } => "verify-rotation",
        Command::VerifyMij { .. } => "verify-mij",
        Command::EulerFit { .. } => "euler-fit",
        Command::Modal { .. } => "modal",
        Command::Simulate { .. } => "simulate",
        Command::Report => "report",
    }
}

fn header(cli: &Cli) -> Value {
    json!({
        "prng": triosc::sampling::PRNG_ALGORITHM,
        "adjoint_convention": triosc::euler::ADJOINT_CONVENTION,
        "seed": cli.seed,
        "samples": cli.samples,
        "tol": cli.tol,
        "mode": cli.mode,
        "config": cli.config.as_ref().map(|p| p.display().to_string()),
    })
}

fn render(cli: &Cli, outcome: &Outcome) -> std::io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match cli.format {
        FormatArg::Json => {
            let header = header(cli);
            let error = outcome
                .error
                .as_ref()
                .map(|e| serde_json::to_value(e).expect("error serializes"));
            let env = Envelope {
                schema_version: SCHEMA_VERSION,
                command: command_name(&cli.command),
                header: &header,
                result: outcome.result.as_ref(),
                error: error.as_ref(),
            };
            write_json(&mut buf, &env)?;
        }
        FormatArg::Csv => {
            if let Some(e) = &outcome.error {
                if outcome.table.rows.is_empty() {
                    return error_table(e).write(&mut buf).map(|_| buf);
                }
            }
            outcome.table.write(&mut buf)?;
        }
    }
    Ok(buf)
}

fn error_table(e: &triosc::Error) -> Table {
    let mut t = Table::new(&["error", "message"]);
    t.push(vec![e.kind().to_string(), e.to_string()]);
    t
}

fn emit(cli: &Cli, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), String> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => stdout.write_all(bytes).map_err(|e| e.to_string()),
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let text = e.render().to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line} (hint: triosc --help)");
            return 1;
        }
    };

    let outcome = match commands::execute(&cli) {
        Ok(o) => o,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(
                stderr,
                "error: {e} (hint: triosc {} --help)",
                command_name(&cli.command)
            );
            return 1;
        }
        Err(Failure::Numeric(e)) => Outcome {
            error: Some(e),
            ..Outcome::default()
        },
    };

    let code = if outcome.error.is_some() { 2 } else { 0 };
    if let Some(e) = &outcome.error {
        let _ = writeln!(stderr, "error: {e}");
    }
    let bytes = match render(&cli, &outcome) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    if let Err(e) = emit(&cli, &bytes, stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    code
}
