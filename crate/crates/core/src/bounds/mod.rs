//! Error envelopes and the arithmetic quantities inside them, and the
//! comparison of observed residuals against those envelopes.

pub mod envelope;
pub mod report;
pub mod terms;

pub use envelope::{
    envelope_ag_cm, envelope_cm_grh, envelope_noncm_grh, envelope_siegel, exp_noncm_1,
    exp_noncm_2, BoundsInput, Envelope, SiegelValue, DEFAULT_D_CAP,
};
pub use report::{bounds_table, residual_report, slope_fit, EnvelopeReport, ResidualRow};
pub use terms::{g_d_bound, g_d_constant, q_split, r_e_q1, r_e_q1_exact, s_e, SeriesValue};

use thiserror::Error;

use crate::arith::ArithError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid bounds input: {0}")]
    Input(String),
    #[error("this envelope needs {0}, which was not supplied")]
    Missing(&'static str),
    #[error("{found} checkpoints in range, need at least {needed}")]
    TooFewCheckpoints { found: usize, needed: usize },
}
