mod commands;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use spectral_tetris::{Error, ErrorKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_INPUT: u8 = 64;
/// Internal inconsistency: a construction broke one of its own guarantees.
pub const EXIT_DEFECT: u8 = 70;
pub const EXIT_IO: u8 = 74;

pub const TOLERANCE_ENV: &str = "SPECTRAL_TETRIS_TOLERANCE";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    pub details: Option<Value>,
}

impl CliError {
    pub fn input(message: String) -> Self {
        CliError {
            code: EXIT_INPUT,
            message,
            details: None,
        }
    }

    pub fn io(message: String) -> Self {
        CliError {
            code: EXIT_IO,
            message,
            details: None,
        }
    }

    fn status(&self) -> &'static str {
        match self.code {
            EXIT_VERIFY => "verification_failed",
            EXIT_INFEASIBLE => "infeasible",
            EXIT_BUDGET => "budget_exhausted",
            EXIT_INPUT => "input_error",
            EXIT_DEFECT => "defect",
            _ => "io_error",
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Infeasible => EXIT_INFEASIBLE,
            ErrorKind::Budget => EXIT_BUDGET,
            ErrorKind::Defect => EXIT_DEFECT,
        };
        let details = match &e {
            Error::ConditionsViolated(checks) => Some(json!({ "conditions": checks })),
            Error::NotReady(failure) => Some(json!({ "readiness": failure })),
            _ => None,
        };
        CliError {
            code,
            message: e.to_string(),
            details,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spectral-tetris", version, about = "Sparse frames and fusion frames with prescribed spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MatrixFormat {
    DenseCsv,
    SparseJson,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrderingChoice {
    Explicit,
    Spread,
    Periodic,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check whether a norm ordering is ready for construction.
    CheckReady {
        problem: PathBuf,
        /// Search all orderings of norms and eigenvalues for a ready one.
        #[arg(long)]
        search: bool,
        /// Maximum number of orderings examined by --search.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Build a sparse frame with the given squared norms and spectrum.
    Frame {
        problem: PathBuf,
        /// Exchange adjacent norms whenever a block cannot be formed.
        #[arg(long)]
        reorder: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dense-csv")]
        format: MatrixFormat,
    },
    /// Build a weighted fusion frame.
    Fusion {
        problem: PathBuf,
        /// Slot ordering; defaults to the file's ordering if present, else
        /// the equal-dimension constructions or the spread ordering.
        #[arg(long, value_enum)]
        ordering: Option<OrderingChoice>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a matrix or bundle against expectations.
    Verify {
        matrix: PathBuf,
        expectations: Option<PathBuf>,
        /// Verification tolerance (default 1e-9, or $SPECTRAL_TETRIS_TOLERANCE).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Rewrite a bundle so that every part is orthogonal with equal norms.
    Canonicalize {
        bundle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CheckReady { problem, search, budget } => commands::check_ready(&problem, search, budget),
        Command::Frame {
            problem,
            reorder,
            out,
            format,
        } => commands::frame(&problem, reorder, out.as_deref(), format),
        Command::Fusion { problem, ordering, out } => commands::fusion(&problem, ordering, out.as_deref()),
        Command::Verify {
            matrix,
            expectations,
            tolerance,
        } => commands::verify(&matrix, expectations.as_deref(), tolerance),
        Command::Canonicalize { bundle, out } => commands::canonicalize(&bundle, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            let mut report = json!({ "status": e.status(), "error": e.message });
            if let Some(details) = e.details {
                report["details"] = details;
            }
            print!("{}", formats::pretty(&report));
            ExitCode::from(e.code)
        }
    }
}
