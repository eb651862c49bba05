//! Truncated evaluations of the cyclicity and exponent constants.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

use super::degree::{gl2_order, DegreeModel};
use super::ConstantsError;
use crate::arith::{count_primes, mobius, pair_coefficient, Progression, Rational};
use crate::curve::CurveSpec;
use crate::structure::PrimeRecord;

/// Smallest holdout accepted by the empirical backend.
pub const MIN_SAMPLE: u64 = 1000;
pub const DEFAULT_M_EXACT: u64 = 50;
pub const DEFAULT_M_EMPIRICAL: u64 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Cyclicity,
    Exponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[serde(rename = "exact_generic")]
    Exact,
    Empirical,
    Hybrid,
}

/// Coefficient multiplying the `m`-th density in the exponent series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentForm {
    /// `sum_{de = m} mu(d)/e`: the coefficient with `sum_{m | n} c(m) = 1/n`.
    Exact,
    /// `sum_{de | m} mu(d)/e`, which equals `1/m`.
    Literal,
    /// `mu(m) sum_{de | m} mu(d)/e`.
    Printed,
}

impl ExponentForm {
    pub fn coefficient(self, m: u64) -> Rational {
        match self {
            ExponentForm::Exact => pair_coefficient(m),
            ExponentForm::Literal => Rational::new(1, m as i128),
            ExponentForm::Printed => Rational::new(mobius(m) as i128, m as i128),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum Provenance {
    Exact,
    Empirical,
    /// Cancels exactly against the term at `partner = 2m`, because
    /// `Q(E[2m]) = Q(E[m])` when `E[2]` is rational.
    Paired { partner: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub m: u64,
    /// `mu(m)` for the cyclicity series, the exponent coefficient otherwise.
    pub weight: f64,
    /// `None` when the indicator is folded into a measured density.
    pub gamma: Option<u8>,
    pub degree: Option<u128>,
    /// `gamma / degree`, or the measured density.
    pub delta: Option<f64>,
    pub stderr: f64,
    pub contribution: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub kind: Kind,
    pub value: f64,
    #[serde(rename = "M")]
    pub truncation: u64,
    pub backend: Backend,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_form: Option<ExponentForm>,
    pub q: u64,
    pub a: u64,
    pub terms: Vec<Term>,
    /// `C / M`, bounding the tail of the series.
    pub truncation_bound: f64,
    pub truncation_constant: f64,
    /// `sqrt(sum (weight * stderr)^2)` over the measured terms.
    pub statistical_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holdout: Option<(u64, u64)>,
}

impl DensityEstimate {
    pub fn combined_error(&self) -> f64 {
        self.truncation_bound + self.statistical_error
    }
}

/// Split data for the primes of a progression in a holdout range `(lo, hi]`.
#[derive(Clone, Debug)]
pub struct SplitSample {
    pub lo: u64,
    pub hi: u64,
    pub q: u64,
    pub a: u64,
    /// Good primes in `(lo, hi]` in every residue class: the denominator.
    pub total: u64,
    dps: Vec<u64>,
}

impl SplitSample {
    /// Collects `d_p` for the records in `(lo, hi]`, which must be exactly the
    /// good primes of the progression there.
    pub fn from_records(
        records: &[PrimeRecord],
        spec: &CurveSpec,
        q: u64,
        a: u64,
        lo: u64,
        hi: u64,
    ) -> Result<Self, ConstantsError> {
        if lo >= hi {
            return Err(ConstantsError::Domain("holdout range is empty"));
        }
        let prog = Progression::new(q, a)?;
        let good = |pr: Progression| {
            let bad = spec
                .bad_primes
                .range(lo + 1..=hi)
                .filter(|&&p| pr.contains(p))
                .count() as u64;
            count_primes(lo + 1, hi, pr) - bad
        };
        let dps: Vec<u64> = records
            .iter()
            .filter(|r| r.p > lo && r.p <= hi)
            .map(|r| r.dp)
            .collect();
        let expected = good(prog);
        if dps.len() as u64 != expected {
            return Err(ConstantsError::SampleMismatch(format!(
                "{} records in ({lo}, {hi}] but the progression has {expected} good primes there",
                dps.len()
            )));
        }
        Ok(SplitSample { lo, hi, q, a, total: good(Progression::all()), dps })
    }

    pub fn len(&self) -> usize {
        self.dps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dps.is_empty()
    }

    /// Primes of the progression in the holdout with `m | d_p`.
    pub fn count(&self, m: u64) -> u64 {
        self.dps.iter().filter(|&&d| d % m == 0).count() as u64
    }
}

/// Measured density of primes `p ≡ a (mod q)` with `m | d_p`, among all good
/// primes of the holdout, with its binomial standard error.
pub fn empirical_delta(sample: &SplitSample, m: u64) -> Result<(f64, f64), ConstantsError> {
    if m == 0 {
        return Err(ConstantsError::Domain("m must be positive"));
    }
    if sample.total < MIN_SAMPLE {
        return Err(ConstantsError::InsufficientSample {
            count: sample.total,
            needed: MIN_SAMPLE,
        });
    }
    let n = sample.total as f64;
    let d = sample.count(m) as f64 / n;
    Ok((d, (d * (1.0 - d) / n).sqrt()))
}

const TAIL_LIMIT: u64 = 1 << 20;

/// Partial sums of `1/phi(m)^2` up to `TAIL_LIMIT`, over all `m` and over
/// squarefree `m`, with the limits of `X * sum_{m > X}` estimated from the
/// mean of `(m/phi(m))^2` on the table.
struct PhiSquareTable {
    all: Vec<f64>,
    squarefree: Vec<f64>,
    all_limit: f64,
    squarefree_limit: f64,
}

fn phi_square_table() -> &'static PhiSquareTable {
    static TABLE: OnceLock<PhiSquareTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = TAIL_LIMIT as usize;
        let mut phi: Vec<u64> = (0..=n as u64).collect();
        let mut sqfree = vec![true; n + 1];
        for i in 2..=n {
            if phi[i] == i as u64 {
                for j in (i..=n).step_by(i) {
                    phi[j] -= phi[j] / i as u64;
                }
                if let Some(ii) = i.checked_mul(i).filter(|&ii| ii <= n) {
                    for j in (ii..=n).step_by(ii) {
                        sqfree[j] = false;
                    }
                }
            }
        }
        let mut all = vec![0.0; n + 1];
        let mut squarefree = vec![0.0; n + 1];
        let (mut mean_all, mut mean_sf) = (0.0, 0.0);
        for m in 1..=n {
            let r = 1.0 / (phi[m] as f64 * phi[m] as f64);
            let w = (m as f64 * m as f64) * r;
            all[m] = all[m - 1] + r;
            mean_all += w;
            squarefree[m] = squarefree[m - 1];
            if sqfree[m] {
                squarefree[m] += r;
                mean_sf += w;
            }
        }
        PhiSquareTable {
            all,
            squarefree,
            all_limit: mean_all / n as f64,
            squarefree_limit: mean_sf / n as f64,
        }
    })
}

/// `sum_{m > M} 1/phi(m)^2`, over squarefree `m` only when `squarefree`.
pub fn phi_square_tail(m: u64, squarefree: bool) -> f64 {
    let t = phi_square_table();
    let (partial, limit) = if squarefree {
        (&t.squarefree, t.squarefree_limit)
    } else {
        (&t.all, t.all_limit)
    };
    if m >= TAIL_LIMIT {
        return limit / m as f64;
    }
    partial[TAIL_LIMIT as usize] - partial[m as usize] + limit / TAIL_LIMIT as f64
}

/// `(C, C / M)` where `C / M = sum_{m > M} 1/phi(m)^2` bounds the tail of the
/// series of `kind` (every coefficient has absolute value at most 1 and the
/// degrees are at least `phi(m)^2`). The cyclicity series only runs over
/// squarefree `m`.
pub fn truncation_bound(kind: Kind, m: u64) -> (f64, f64) {
    let t = phi_square_tail(m, kind == Kind::Cyclicity);
    (t * m as f64, t)
}

/// Parameters shared by both constants.
#[derive(Clone, Copy, Debug)]
pub struct Query<'a> {
    pub kind: Kind,
    pub backend: Backend,
    pub truncation: u64,
    pub q: u64,
    pub a: u64,
    pub exponent_form: ExponentForm,
    pub model: &'a DegreeModel,
    pub sample: Option<&'a SplitSample>,
}

fn evaluate(query: &Query) -> Result<DensityEstimate, ConstantsError> {
    let Query { kind, backend, truncation: big_m, q, a, exponent_form, model, sample } = *query;
    if big_m == 0 || q == 0 {
        return Err(ConstantsError::Domain("truncation and q must be positive"));
    }
    Progression::new(q, a)?;
    if let Some(s) = sample {
        if s.q != q || s.a % q != a % q {
            return Err(ConstantsError::SampleMismatch(format!(
                "sample is for ({}, {}), query for ({q}, {a})",
                s.q, s.a
            )));
        }
    }
    let pair_rule = kind == Kind::Cyclicity
        && backend != Backend::Empirical
        && model.rational_two_torsion();

    let mut terms = Vec::new();
    let mut infeasible = Vec::new();
    for m in 1..=big_m {
        let weight = match kind {
            Kind::Cyclicity => {
                let mu = mobius(m);
                if mu == 0 {
                    continue;
                }
                mu as f64
            }
            Kind::Exponent => exponent_form.coefficient(m).to_f64(),
        };
        if weight == 0.0 {
            continue;
        }
        if pair_rule && m >= 3 {
            if m % 2 == 1 {
                terms.push(Term {
                    m,
                    weight,
                    gamma: None,
                    degree: None,
                    delta: None,
                    stderr: 0.0,
                    contribution: 0.0,
                    provenance: Provenance::Paired { partner: 2 * m },
                });
            }
            continue;
        }
        let exact = match backend {
            Backend::Empirical => None,
            _ => model.exact(m, q, a),
        };
        let term = if let Some((degree, gamma)) = exact {
            let delta = gamma as f64 / degree as f64;
            Term {
                m,
                weight,
                gamma: Some(gamma),
                degree: Some(degree),
                delta: Some(delta),
                stderr: 0.0,
                contribution: weight * delta,
                provenance: Provenance::Exact,
            }
        } else if backend == Backend::Exact {
            infeasible.push(m);
            continue;
        } else {
            let s = sample.ok_or(ConstantsError::MissingSample)?;
            let (delta, stderr) = empirical_delta(s, m)?;
            Term {
                m,
                weight,
                gamma: None,
                degree: None,
                delta: Some(delta),
                stderr,
                contribution: weight * delta,
                provenance: Provenance::Empirical,
            }
        };
        terms.push(term);
    }
    if !infeasible.is_empty() {
        return Err(ConstantsError::Infeasible { ms: infeasible });
    }
    let value = terms.iter().map(|t| t.contribution).sum();
    let statistical_error = terms
        .iter()
        .map(|t| (t.weight * t.stderr).powi(2))
        .sum::<f64>()
        .sqrt();
    let (truncation_constant, truncation_bound) = truncation_bound(kind, big_m);
    Ok(DensityEstimate {
        kind,
        value,
        truncation: big_m,
        backend,
        exponent_form: (kind == Kind::Exponent).then_some(exponent_form),
        q,
        a,
        terms,
        truncation_bound,
        truncation_constant,
        statistical_error,
        holdout: sample.map(|s| (s.lo, s.hi)),
    })
}

/// `sum_{m <= M} mu(m) gamma_m / [Q(E[m]) Q(zeta_q) : Q]`, with empirical
/// densities where the backend calls for them.
pub fn c_constant(
    backend: Backend,
    truncation: u64,
    q: u64,
    a: u64,
    model: &DegreeModel,
    sample: Option<&SplitSample>,
) -> Result<DensityEstimate, ConstantsError> {
    evaluate(&Query {
        kind: Kind::Cyclicity,
        backend,
        truncation,
        q,
        a,
        exponent_form: ExponentForm::Exact,
        model,
        sample,
    })
}

/// `sum_{m <= M} c(m) gamma_m / [Q(E[m]) Q(zeta_q) : Q]` over all `m`, with
/// `c` chosen by `form`.
pub fn e_constant(
    backend: Backend,
    truncation: u64,
    q: u64,
    a: u64,
    form: ExponentForm,
    model: &DegreeModel,
    sample: Option<&SplitSample>,
) -> Result<DensityEstimate, ConstantsError> {
    evaluate(&Query {
        kind: Kind::Exponent,
        backend,
        truncation,
        q,
        a,
        exponent_form: form,
        model,
        sample,
    })
}

fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| crate::arith::is_prime(k)).collect()
}

/// `prod_{l <= lmax} (1 - 1/|GL_2(F_l)|)`.
pub fn universal_euler_product(lmax: u64) -> f64 {
    primes_up_to(lmax)
        .into_iter()
        .map(|l| 1.0 - 1.0 / gl2_order(l) as f64)
        .product()
}

/// `sum mu(m) / |GL_2(Z/mZ)|` over squarefree `m <= m_cap` whose prime
/// factors are all at most `lmax`. With `m_cap` large this is the Euler
/// product over `l <= lmax` expanded term by term.
pub fn universal_smooth_sum(lmax: u64, m_cap: u64) -> f64 {
    let primes = primes_up_to(lmax);
    let mut terms: BTreeMap<u64, f64> = BTreeMap::new();
    // Depth-first over increasing prime sequences: (index of next prime, m, mu).
    let mut stack = vec![(0usize, 1u64, 1.0f64)];
    while let Some((i, m, mu)) = stack.pop() {
        terms.insert(m, mu / gl2_order(m) as f64);
        for (j, &l) in primes.iter().enumerate().skip(i) {
            match m.checked_mul(l) {
                Some(next) if next <= m_cap => stack.push((j + 1, next, -mu)),
                _ => break,
            }
        }
    }
    // Smallest terms first.
    terms.values().rev().sum()
}
