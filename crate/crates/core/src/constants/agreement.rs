//! Agreement between measured split densities and closed-form degrees.

use serde::Serialize;

use super::degree::DegreeModel;
use super::estimate::{empirical_delta, SplitSample};
use super::ConstantsError;

/// Measured and predicted densities must differ by at most this many
/// standard errors.
pub const AGREEMENT_SIGMAS: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementRow {
    pub m: u64,
    pub measured: f64,
    pub expected: f64,
    /// The larger of the binomial error at the measured density and at the
    /// expected one, so that a zero count is not given zero error.
    pub stderr: f64,
    pub sigmas: f64,
    pub passed: bool,
}

pub fn agreement_row(
    sample: &SplitSample,
    m: u64,
    expected: f64,
) -> Result<AgreementRow, ConstantsError> {
    let (measured, se) = empirical_delta(sample, m)?;
    let null = (expected * (1.0 - expected) / sample.total as f64).sqrt();
    let stderr = se.max(null);
    let diff = (measured - expected).abs();
    let sigmas = if stderr > 0.0 {
        diff / stderr
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(AgreementRow {
        m,
        measured,
        expected,
        stderr,
        sigmas,
        passed: sigmas <= AGREEMENT_SIGMAS,
    })
}

/// Compares every `2 <= m <= m_max` with a closed-form degree against the
/// sample.
pub fn backend_agreement(
    sample: &SplitSample,
    model: &DegreeModel,
    m_max: u64,
) -> Result<Vec<AgreementRow>, ConstantsError> {
    let mut rows = Vec::new();
    for m in 2..=m_max {
        if let Some((degree, gamma)) = model.exact(m, sample.q, sample.a) {
            rows.push(agreement_row(sample, m, gamma as f64 / degree as f64)?);
        }
    }
    Ok(rows)
}
