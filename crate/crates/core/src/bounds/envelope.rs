//! Error-term shapes, with every implied constant set to 1. These are
//! envelope shapes for comparison, not certified inequalities.

use serde::{Deserialize, Serialize};

use super::terms::{g_d_bound, q_split, r_e_q1, s_e};
use super::BoundsError;
use crate::arith::{big_h, euler_phi, factorize, tau2};

pub const DEFAULT_D_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsInput {
    pub x: f64,
    pub q: u64,
    pub a: u64,
    pub n_e: u64,
    /// CM discriminant parameter `D` (CM by the maximal order of `Q(sqrt(-D))`).
    pub d: Option<u64>,
    pub m_e: u64,
    pub a_e: u64,
    pub b_e: Option<u64>,
    /// Exponent in `L(1, chi) >> (log Q)^{-S}`.
    pub s: Option<f64>,
    pub d_cap: u64,
}

impl BoundsInput {
    pub fn validate(&self) -> Result<(), BoundsError> {
        if !(self.x >= 16.0) {
            return Err(BoundsError::Input(format!("x must be at least 16, got {}", self.x)));
        }
        if self.q == 0 || self.n_e == 0 || self.m_e == 0 || self.a_e == 0 || self.d_cap == 0 {
            return Err(BoundsError::Input("q, N_E, M_E, A_E and D_cap must be positive".into()));
        }
        if !factorize(self.m_e).is_squarefree() {
            return Err(BoundsError::Input(format!("M_E = {} is not squarefree", self.m_e)));
        }
        if let Some(s) = self.s {
            if !(s >= -1.0) {
                return Err(BoundsError::Input(format!("S must be at least -1, got {s}")));
            }
        }
        Ok(())
    }

    pub fn with_x(&self, x: f64) -> Self {
        BoundsInput { x, ..self.clone() }
    }

    fn log_qnx(&self) -> f64 {
        (self.q as f64 * self.n_e as f64 * self.x).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// Cyclicity, CM, under GRH.
    CmGrh,
    /// Cyclicity, non-CM, under GRH.
    NoncmGrh,
    /// Cyclicity, CM, the four-term bound with `G_D(a, q)` replaced by its
    /// upper bound.
    AgCm,
    /// Exponent sum, CM: `x` times the two-term bound.
    ExpCm,
    /// Exponent sum, CM: `x` times the four-term bound.
    ExpCmAg,
    /// Exponent sum, non-CM: `x` times the first bound.
    ExpNoncm1,
    /// Exponent sum, non-CM: `x` times the bound involving `S_E`.
    ExpNoncm2,
    /// Cyclicity under the `L(1, chi)` hypothesis.
    Siegel,
    /// Exponent sum under the `L(1, chi)` hypothesis.
    SiegelExp,
}

impl Envelope {
    pub const ALL: [Envelope; 9] = [
        Envelope::CmGrh,
        Envelope::NoncmGrh,
        Envelope::AgCm,
        Envelope::ExpCm,
        Envelope::ExpCmAg,
        Envelope::ExpNoncm1,
        Envelope::ExpNoncm2,
        Envelope::Siegel,
        Envelope::SiegelExp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Envelope::CmGrh => "cm_grh",
            Envelope::NoncmGrh => "noncm_grh",
            Envelope::AgCm => "ag_cm",
            Envelope::ExpCm => "exp_cm",
            Envelope::ExpCmAg => "exp_cm_ag",
            Envelope::ExpNoncm1 => "exp_noncm_1",
            Envelope::ExpNoncm2 => "exp_noncm_2",
            Envelope::Siegel => "siegel",
            Envelope::SiegelExp => "siegel_exp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Envelope::ALL.into_iter().find(|e| e.name() == s)
    }

    /// Whether the envelope bounds the exponent sum rather than the count.
    pub fn is_exponent(self) -> bool {
        matches!(
            self,
            Envelope::ExpCm
                | Envelope::ExpCmAg
                | Envelope::ExpNoncm1
                | Envelope::ExpNoncm2
                | Envelope::SiegelExp
        )
    }

    pub fn evaluate(self, input: &BoundsInput) -> Result<f64, BoundsError> {
        input.validate()?;
        let x = input.x;
        Ok(match self {
            Envelope::CmGrh => envelope_cm_grh(input),
            Envelope::NoncmGrh => envelope_noncm_grh(input),
            Envelope::AgCm => envelope_ag_cm(input)?,
            Envelope::ExpCm => x * envelope_cm_grh(input),
            Envelope::ExpCmAg => x * envelope_ag_cm(input)?,
            Envelope::ExpNoncm1 => x * exp_noncm_1(input),
            Envelope::ExpNoncm2 => x * exp_noncm_2(input)?,
            Envelope::Siegel => envelope_siegel(input)?.value,
            Envelope::SiegelExp => x * envelope_siegel(input)?.value,
        })
    }
}

/// `x^{3/4} (log(q N_E x) / log x)^{1/2} + x^{1/4} log N_E`.
pub fn envelope_cm_grh(i: &BoundsInput) -> f64 {
    let x = i.x;
    x.powf(0.75) * (i.log_qnx() / x.ln()).sqrt() + x.powf(0.25) * (i.n_e as f64).ln()
}

/// `x^{5/6} log(q N_E x)^{2/3} / (log x)^{1/3}
///  + tau_2(q2) log(q N_E x) R_{E,q1} / phi(q)`.
pub fn envelope_noncm_grh(i: &BoundsInput) -> f64 {
    let x = i.x;
    let (q1, q2) = q_split(i.q, i.m_e);
    let l = i.log_qnx();
    x.powf(5.0 / 6.0) * l.powf(2.0 / 3.0) / x.ln().powf(1.0 / 3.0)
        + tau2(q2) as f64 * l * r_e_q1(i.m_e, q1) / euler_phi(i.q) as f64
}

/// The four-term CM bound with `G_D(a, q)` replaced by its upper bound.
pub fn envelope_ag_cm(i: &BoundsInput) -> Result<f64, BoundsError> {
    let d = i.d.ok_or(BoundsError::Missing("D"))?;
    let x = i.x;
    let q = i.q as f64;
    let l = i.log_qnx();
    let g = g_d_bound(d, i.q);
    Ok(x.powf(0.75) * (l * g / q.powi(3)).sqrt()
        + x.powf(0.75) * (l / x.ln()).sqrt()
        + x.sqrt() * q * l
        + x.sqrt() * (1.0 / q + x.ln() / (q * q)) * g)
}

/// `x^{5/6} log(q N_E x)^{2/3} / (log x)^{1/3} + x^{1/2} / q`.
pub fn exp_noncm_1(i: &BoundsInput) -> f64 {
    let x = i.x;
    x.powf(5.0 / 6.0) * i.log_qnx().powf(2.0 / 3.0) / x.ln().powf(1.0 / 3.0) + x.sqrt() / i.q as f64
}

/// The four-term non-CM bound involving `H(q)` and `S_E`.
pub fn exp_noncm_2(i: &BoundsInput) -> Result<f64, BoundsError> {
    let b_e = i.b_e.ok_or(BoundsError::Missing("B_E"))?;
    let x = i.x;
    let q = i.q as f64;
    let l = i.log_qnx();
    let (_, q2) = q_split(i.q, i.m_e);
    let t = tau2(q2) as f64;
    let phi2 = euler_phi(q2) as f64;
    let se = s_e(i.m_e, b_e, i.d_cap);
    let s = se.value + se.tail_bound;
    Ok(x.powf(5.0 / 6.0) * (big_h(i.q) as f64 * l * l / q).powf(1.0 / 3.0)
        + x.powf(5.0 / 8.0) * (t * l.powi(3) / (phi2 * x.ln()) * s).powf(0.25)
        + x.sqrt() * q * l
        + t / (phi2 * x.sqrt() * x.ln()) * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SiegelValue {
    /// `x exp(-(log x)^{1/(2S+4)})`.
    pub value: f64,
    pub exponent: f64,
    /// `exp((log x)^{1/(2S+4)} / 2)`: the largest `q N_E` covered.
    pub uniformity_limit: f64,
    pub in_range: bool,
}

/// The `L(1, chi)` envelope, with `c_1 = 1` and `kappa = 1`.
pub fn envelope_siegel(i: &BoundsInput) -> Result<SiegelValue, BoundsError> {
    let s = i.s.ok_or(BoundsError::Missing("S"))?;
    let theta = 1.0 / (2.0 * s + 4.0);
    let lx = i.x.ln().powf(theta);
    let limit = (lx / 2.0).exp();
    Ok(SiegelValue {
        value: i.x * (-lx).exp(),
        exponent: theta,
        uniformity_limit: limit,
        in_range: (i.q as f64) * (i.n_e as f64) <= limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(x: f64) -> BoundsInput {
        BoundsInput {
            x,
            q: 1,
            a: 1,
            n_e: 1,
            d: Some(1),
            m_e: 2,
            a_e: 30,
            b_e: Some(1),
            s: Some(-1.0),
            d_cap: DEFAULT_D_CAP,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn cm_grh_logs_cancel() {
        let e4 = 4f64.exp();
        assert!(close(envelope_cm_grh(&input(e4)), 3f64.exp()));
        let mut i = input(1e8);
        i.q = 5;
        let a = envelope_cm_grh(&i);
        i.n_e = 496;
        let b = envelope_cm_grh(&i);
        assert!(b > a && b.is_finite());
    }

    #[test]
    fn noncm_grh_literal() {
        // x = e^6, q = 1, N_E = 1, M_E = 2: e^5 6^{2/3} / 6^{1/3} + 6 * (1 + 8).
        let got = envelope_noncm_grh(&input(6f64.exp()));
        let want = 5f64.exp() * 6f64.powf(2.0 / 3.0) / 6f64.powf(1.0 / 3.0) + 6.0 * 9.0;
        assert!(close(got, want));
        // The q = 1 form: log(N_E x) sum_{d | M_E} d^3/phi(d).
        let mut i = input(1e9);
        i.n_e = 11;
        i.m_e = 6;
        let lead = i.x.powf(5.0 / 6.0) * (11e9f64).ln().powf(2.0 / 3.0) / 1e9f64.ln().powf(1.0 / 3.0);
        let second = (11e9f64).ln() * (1.0 + 8.0 + 13.5 + 108.0);
        assert!(close(envelope_noncm_grh(&i), lead + second));
    }

    #[test]
    fn noncm_grh_is_eventually_below_x_to_point_nine() {
        let r = |x: f64| envelope_noncm_grh(&input(x)) / x.powf(0.9);
        assert!(r(1e30) < r(1e15) && r(1e60) < r(1e30) && r(1e120) < 0.1);
    }

    #[test]
    fn siegel_examples() {
        let i = input(16f64.exp());
        let v = envelope_siegel(&i).unwrap();
        assert!(close(v.value, i.x * (-4f64).exp()));
        assert_eq!(v.exponent, 0.5);
        let mut j = input(1e12);
        j.s = Some(2022.0);
        assert_eq!(envelope_siegel(&j).unwrap().exponent, 1.0 / 4048.0);
        // A larger S gives a smaller exponent, hence a weaker saving.
        let (mut prev_value, mut prev_exp) = (0.0, f64::INFINITY);
        for s in [-1.0, 0.0, 1.0, 5.0, 100.0, 2022.0] {
            j.s = Some(s);
            let v = envelope_siegel(&j).unwrap();
            assert!(v.exponent < prev_exp && v.value > prev_value && v.value < j.x, "S = {s}");
            (prev_value, prev_exp) = (v.value, v.exponent);
        }
    }

    #[test]
    fn missing_inputs_are_errors() {
        let mut i = input(1e6);
        i.b_e = None;
        i.s = None;
        i.d = None;
        assert_eq!(Envelope::ExpNoncm2.evaluate(&i), Err(BoundsError::Missing("B_E")));
        assert_eq!(Envelope::Siegel.evaluate(&i), Err(BoundsError::Missing("S")));
        assert_eq!(Envelope::AgCm.evaluate(&i), Err(BoundsError::Missing("D")));
        i.x = 10.0;
        assert!(matches!(Envelope::CmGrh.evaluate(&i), Err(BoundsError::Input(_))));
    }

    #[test]
    fn both_noncm_exponent_variants_evaluate() {
        let i = input(1e10);
        let v1 = Envelope::ExpNoncm1.evaluate(&i).unwrap();
        let v2 = Envelope::ExpNoncm2.evaluate(&i).unwrap();
        assert!(v1 > 0.0 && v2 > 0.0);
    }

    #[test]
    fn names_round_trip() {
        for e in Envelope::ALL {
            assert_eq!(Envelope::parse(e.name()), Some(e));
        }
    }

    proptest! {
        #[test]
        fn envelopes_positive_and_increasing(
            q in 1u64..60,
            n_e in 1u64..100_000,
            m_e in prop::sample::select(vec![2u64, 6, 30, 210, 62, 2 * 3 * 31]),
            d in 1u64..50,
            s in -1.0f64..50.0,
            lx in 4.7f64..60.0,
        ) {
            let base = BoundsInput { x: lx.exp(), q, a: 1, n_e, d: Some(d), m_e, a_e: 30, b_e: Some(2), s: Some(s), d_cap: 10_000 };
            for e in Envelope::ALL {
                let lo = e.evaluate(&base).unwrap();
                let hi = e.evaluate(&base.with_x(base.x * 1.5)).unwrap();
                prop_assert!(lo > 0.0, "{} not positive", e.name());
                prop_assert!(hi > lo, "{} not increasing at x = {}", e.name(), base.x);
                prop_assert_eq!(lo.to_bits(), e.evaluate(&base).unwrap().to_bits());
            }
        }
    }
}
