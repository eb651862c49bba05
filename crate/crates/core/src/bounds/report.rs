//! Observed residuals against the main terms, set beside an envelope.

use serde::Serialize;

use super::envelope::{BoundsInput, Envelope};
use super::BoundsError;
use crate::arith::log_integral;
use crate::constants::Kind;
use crate::scan::Snapshot;

/// Smallest `x` at which the envelopes are defined.
pub const MIN_X: u64 = 16;
pub const MIN_CHECKPOINTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub x: u64,
    /// Observed count or sum at `x`.
    pub count: f64,
    /// `constant * Li(x)` (or `Li(x^2)` for the exponent sum).
    pub main_term: f64,
    /// `count - main_term`.
    pub observed: f64,
    pub envelope: f64,
    /// `|observed| / envelope`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub kind: Kind,
    pub envelope: &'static str,
    pub constant: f64,
    pub checkpoints: Vec<ResidualRow>,
    /// Least-squares slope of `log|residual|` against `log x`; `None` when
    /// fewer than two residuals are nonzero.
    pub slope_fit: Option<f64>,
    pub note: &'static str,
}

pub const ENVELOPE_NOTE: &str =
    "envelope shape: implied constants set to 1; not a certified bound";

impl EnvelopeReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,observed,envelope,ratio\n");
        for r in &self.checkpoints {
            out.push_str(&format!("{},{},{},{}\n", r.x, r.observed, r.envelope, r.ratio));
        }
        out
    }

    /// Tab-separated `x, count, main term, residual, envelope`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("x\tcount\tmain_term\tresidual\tenvelope\n");
        for r in &self.checkpoints {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.x, r.count, r.main_term, r.observed, r.envelope
            ));
        }
        out
    }
}

/// Least-squares slope of `log|r|` against `log x` over the points with
/// `r != 0`.
pub fn slope_fit(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, r)| *r != 0.0)
        .map(|&(x, r)| (x.ln(), r.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Residuals of the snapshots with `lo <= x <= hi` against `constant` times
/// the main term, beside `envelope` evaluated with `input` at each `x`.
pub fn residual_report(
    snapshots: &[Snapshot],
    constant: f64,
    kind: Kind,
    envelope: Envelope,
    input: &BoundsInput,
    range: (u64, u64),
) -> Result<EnvelopeReport, BoundsError> {
    if envelope.is_exponent() != (kind == Kind::Exponent) {
        return Err(BoundsError::Input(format!(
            "envelope {} does not apply to the {kind:?} residual",
            envelope.name()
        )));
    }
    let lo = range.0.max(MIN_X);
    let mut rows = Vec::new();
    for s in snapshots.iter().filter(|s| s.x >= lo && s.x <= range.1) {
        let x = s.x as f64;
        let (count, main) = match kind {
            Kind::Cyclicity => (s.cyclic_count as f64, constant * log_integral(x)?),
            Kind::Exponent => {
                let sum = s.exponent_sum().map_err(|e| BoundsError::Input(e.to_string()))?;
                (sum as f64, constant * log_integral(x * x)?)
            }
        };
        let observed = count - main;
        let env = envelope.evaluate(&input.with_x(x))?;
        rows.push(ResidualRow {
            x: s.x,
            count,
            main_term: main,
            observed,
            envelope: env,
            ratio: observed.abs() / env,
        });
    }
    if rows.len() < MIN_CHECKPOINTS {
        return Err(BoundsError::TooFewCheckpoints {
            found: rows.len(),
            needed: MIN_CHECKPOINTS,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x as f64, r.observed)).collect();
    Ok(EnvelopeReport {
        kind,
        envelope: envelope.name(),
        constant,
        slope_fit: slope_fit(&pts),
        checkpoints: rows,
        note: ENVELOPE_NOTE,
    })
}

/// Envelope values on a grid of `x`, with no data.
pub fn bounds_table(
    input: &BoundsInput,
    envelopes: &[Envelope],
    grid: &[f64],
) -> Result<Vec<(f64, Vec<f64>)>, BoundsError> {
    grid.iter()
        .map(|&x| {
            let i = input.with_x(x);
            let vals = envelopes.iter().map(|e| e.evaluate(&i)).collect::<Result<_, _>>()?;
            Ok((x, vals))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::Accumulator;

    fn input() -> BoundsInput {
        BoundsInput {
            x: 100.0,
            q: 1,
            a: 1,
            n_e: 496,
            d: None,
            m_e: 62,
            a_e: 30,
            b_e: None,
            s: None,
            d_cap: 1000,
        }
    }

    fn snap(x: u64, cyclic: u64) -> Snapshot {
        let mut s = Accumulator::new(1).snapshot(x);
        s.cyclic_count = cyclic;
        s.prime_count = cyclic;
        s
    }

    fn grid() -> Vec<u64> {
        let mut xs = Vec::new();
        for k in 4..=7 {
            xs.push(10u64.pow(k));
            if k < 7 {
                xs.push(2 * 10u64.pow(k));
            }
        }
        xs
    }

    #[test]
    fn planted_power_residual_slope() {
        let c = 0.8;
        let snaps: Vec<Snapshot> = grid()
            .into_iter()
            .map(|x| {
                let xf = x as f64;
                let count = c * log_integral(xf).unwrap() + xf.powf(0.75);
                snap(x, count.round() as u64)
            })
            .collect();
        let rep = residual_report(&snaps, c, Kind::Cyclicity, Envelope::NoncmGrh, &input(), (0, u64::MAX))
            .unwrap();
        let slope = rep.slope_fit.unwrap();
        assert!((slope - 0.75).abs() < 0.01, "{slope}");
        assert!(rep.checkpoints.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }

    #[test]
    fn zero_constant_and_zero_count() {
        let snaps: Vec<Snapshot> = grid().into_iter().map(|x| snap(x, 0)).collect();
        let rep = residual_report(&snaps, 0.0, Kind::Cyclicity, Envelope::CmGrh, &input(), (0, u64::MAX))
            .unwrap();
        assert!(rep.checkpoints.iter().all(|r| r.observed == 0.0 && r.ratio == 0.0));
        assert_eq!(rep.slope_fit, None);
        assert!(rep.to_csv().starts_with("x,observed,envelope,ratio\n10000,0,"));
    }

    #[test]
    fn needs_four_checkpoints_and_matching_kind() {
        let snaps: Vec<Snapshot> = [100, 1000, 10_000].into_iter().map(|x| snap(x, 1)).collect();
        assert!(matches!(
            residual_report(&snaps, 0.5, Kind::Cyclicity, Envelope::CmGrh, &input(), (0, u64::MAX)),
            Err(BoundsError::TooFewCheckpoints { found: 3, .. })
        ));
        assert!(residual_report(&snaps, 0.5, Kind::Exponent, Envelope::CmGrh, &input(), (0, u64::MAX)).is_err());
    }

    #[test]
    fn slope_of_exact_power() {
        let pts: Vec<(f64, f64)> = (1..10).map(|k| (10f64.powi(k), -(10f64.powi(k)).powf(0.6))).collect();
        assert!((slope_fit(&pts).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(slope_fit(&[(10.0, 1.0)]), None);
    }
}
