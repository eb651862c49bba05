//! Prime scans over a progression: records, running totals, checkpoints and
//! the exact identities they must satisfy.

pub mod accumulator;
pub mod checks;
pub mod config;
pub mod io;
pub mod run;

pub use accumulator::{Accumulator, Snapshot, FORMAT_VERSION};
pub use checks::{exponent_identity_check, inclusion_exclusion_check};
pub use config::{default_checkpoints, ScanConfig};
pub use run::{compute_record, run_scan, run_scan_from, MemorySink, NullSink, ScanOutcome, ScanSink};

use thiserror::Error;

use crate::arith::ArithError;
use crate::curve::CurveError;
use crate::structure::StructureError;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("invalid scan configuration: {0}")]
    Config(String),
    #[error("m = {m} is outside the tracked range 1..={m_max}")]
    MOutOfRange { m: u64, m_max: u64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("malformed data: {0}")]
    Format(String),
}
