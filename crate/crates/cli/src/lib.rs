//! Front end for `finindex-core`: reads a JSON job specification, runs the
//! requested analyses and renders a versioned JSON report.

pub mod pretty;
pub mod run;
pub mod spec;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use run::{run, ReportBundle, RunOptions, REPORT_VERSION};
pub use spec::{resolve, Analysis, JobSpec, Tols};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("spec error: {0}")]
    Spec(String),

    #[error("numerical failure: {0}")]
    Numerical(finindex_core::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 1 for bad input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            CliError::Spec(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<finindex_core::Error> for CliError {
    fn from(e: finindex_core::Error) -> Self {
        use finindex_core::Error::*;
        match e {
            DegenerateModule(_)
            | NotCentral(_)
            | IndexNotScalar(_)
            | InconsistentExtension(_)
            | SearchDidNotConverge(_)
            | DegeneratePerron(_)
            | NotInBasicConstruction(_)
            | CorrespondenceViolation(_) => CliError::Numerical(e),
            other => CliError::Spec(other.to_string()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses and runs a job document; `analyses` and `seed` override the
/// document when given.
pub fn run_document(
    text: &str,
    analyses: Option<Vec<Analysis>>,
    seed: Option<u64>,
    tol: Option<f64>,
    timings: bool,
) -> Result<ReportBundle, CliError> {
    let job = JobSpec::from_json(text)?;
    let analyses = analyses.unwrap_or_else(|| job.analyses.clone());
    if analyses.is_empty() {
        return Err(CliError::Spec("no analyses requested".into()));
    }
    let tols = Tols::resolve(&job.tolerances, tol)?;
    let resolved = resolve(&job)?;
    let opts = RunOptions {
        analyses,
        seed: seed.unwrap_or(job.seed),
        tols,
        spec_sha256: sha256_hex(text.as_bytes()),
        timings,
    };
    run(&resolved, &opts)
}

pub fn parse_analysis_list(list: &str) -> Result<Vec<Analysis>, CliError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}
