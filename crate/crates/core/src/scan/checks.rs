//! Exact identities that every complete dataset must satisfy.

use std::collections::HashMap;

use serde::Serialize;

use super::accumulator::Snapshot;
use crate::arith::{factorize, inner_mu_sum, mobius, pair_coefficient, Rational};
use crate::structure::PrimeRecord;

#[derive(Clone, Debug, Serialize)]
pub struct InclusionExclusionRow {
    pub x: u64,
    /// Cyclic count stored in the snapshot.
    pub pi_c: u64,
    /// Records up to `x` with `d_p = 1`.
    pub records_pi_c: u64,
    /// `sum over records of sum_{m | d_p} mu(m)`.
    pub mobius_sum: i64,
    /// `sum_{m <= m_max} mu(m) pi_{E,m}(x)` from the snapshot, when `m_max`
    /// exceeds `floor(sqrt x)`.
    pub snapshot_sum: Option<i64>,
    /// `pi_c - mobius_sum`.
    pub residual: i64,
    /// `pi_c - snapshot_sum`.
    pub snapshot_residual: Option<i64>,
}

impl InclusionExclusionRow {
    pub fn passed(&self) -> bool {
        self.residual == 0
            && self.records_pi_c == self.pi_c
            && self.snapshot_residual.unwrap_or(0) == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionExclusionReport {
    pub rows: Vec<InclusionExclusionRow>,
    pub first_offender: Option<u64>,
}

impl InclusionExclusionReport {
    pub fn passed(&self) -> bool {
        self.first_offender.is_none() && self.rows.iter().all(|r| r.passed())
    }
}

/// `sum_{m | d} mu(m)` by listing the squarefree divisors of `d`.
fn mobius_divisor_sum(d: u64) -> i64 {
    factorize(d)
        .squarefree_divisors()
        .into_iter()
        .map(mobius)
        .sum()
}

/// Checks `pi_c(x) = sum_m mu(m) pi_{E,m}(x)` at every checkpoint.
///
/// The right side is computed per record from the divisors of `d_p`, which
/// needs no bound on `m`. When a snapshot tracks every `m <= sqrt(x) + 1`
/// the truncated sum over its split counts is compared as well; no prime
/// `p <= x` has `d_p` beyond that bound.
pub fn inclusion_exclusion_check(
    records: &[PrimeRecord],
    snapshots: &[Snapshot],
) -> InclusionExclusionReport {
    let mut rows = Vec::new();
    let mut first_offender = None;
    let mut i = 0;
    let (mut pi_c, mut sum) = (0u64, 0i64);
    for snap in snapshots {
        while i < records.len() && records[i].p <= snap.x {
            let r = &records[i];
            let lhs = u64::from(r.dp == 1);
            let rhs = mobius_divisor_sum(r.dp);
            if lhs as i64 != rhs && first_offender.is_none() {
                first_offender = Some(r.p);
            }
            pi_c += lhs;
            sum += rhs;
            i += 1;
        }
        let m_max = snap.split_counts.len() as u64;
        let snapshot_sum = (m_max > snap.x.isqrt()).then(|| {
            snap.split_counts
                .iter()
                .map(|(&m, &c)| mobius(m) * c as i64)
                .sum::<i64>()
        });
        let c = snap.cyclic_count as i64;
        rows.push(InclusionExclusionRow {
            x: snap.x,
            pi_c: snap.cyclic_count,
            records_pi_c: pi_c,
            mobius_sum: sum,
            snapshot_sum,
            residual: c - sum,
            snapshot_residual: snapshot_sum.map(|s| c - s),
        });
    }
    InclusionExclusionReport {
        rows,
        first_offender,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentReport {
    pub records: usize,
    /// `sum e_p`.
    pub exponent_sum: String,
    /// `sum (p + 1 - a_p) * sum_{de | d_p} mu(d)/e`.
    pub expanded_sum: String,
    /// `sum_m c(m) * sum_{p : m | d_p} (p + 1 - a_p)` with `c(m) = sum_{de = m} mu(d)/e`.
    pub regrouped_sum: String,
    pub first_offender: Option<u64>,
}

impl ExponentReport {
    pub fn passed(&self) -> bool {
        self.first_offender.is_none()
            && self.exponent_sum == self.expanded_sum
            && self.exponent_sum == self.regrouped_sum
    }
}

/// Checks `e_p d_p = p + 1 - a_p` for every record and the aggregate
/// identities for `sum e_p` in exact rational arithmetic.
pub fn exponent_identity_check(records: &[PrimeRecord]) -> ExponentReport {
    let mut first_offender = None;
    let mut direct: u128 = 0;
    let mut expanded = Rational::ZERO;
    let mut inner_cache: HashMap<u64, Rational> = HashMap::new();
    let mut by_m: HashMap<u64, i128> = HashMap::new();
    for r in records {
        let n = (r.p as i128) + 1 - r.ap as i128;
        if r.dp == 0 || (r.dp as i128) * (r.ep as i128) != n {
            first_offender.get_or_insert(r.p);
            continue;
        }
        direct += r.ep as u128;
        let inner = *inner_cache.entry(r.dp).or_insert_with(|| inner_mu_sum(r.dp));
        expanded += Rational::integer(n) * inner;
        for m in factorize(r.dp).divisors() {
            *by_m.entry(m).or_insert(0) += n;
        }
    }
    let mut ms: Vec<u64> = by_m.keys().copied().collect();
    ms.sort_unstable();
    let regrouped: Rational = ms
        .into_iter()
        .map(|m| pair_coefficient(m) * Rational::integer(by_m[&m]))
        .sum();
    ExponentReport {
        records: records.len(),
        exponent_sum: direct.to_string(),
        expanded_sum: expanded.to_string(),
        regrouped_sum: regrouped.to_string(),
        first_offender,
    }
}

/// `max_m pi_{E,m}(x) m^2 / x` over the tracked `m >= 2`: the constant in
/// `pi_{E,m}(x) << x / m^2`.
pub fn split_bound_constant(snap: &Snapshot) -> f64 {
    snap.split_counts
        .iter()
        .filter(|(&m, _)| m >= 2)
        .map(|(&m, &c)| c as f64 * (m * m) as f64 / snap.x as f64)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::accumulator::Accumulator;

    fn snap_of(records: &[PrimeRecord], x: u64, m_max: u64) -> Snapshot {
        let mut acc = Accumulator::new(m_max);
        for r in records.iter().filter(|r| r.p <= x) {
            acc.add(r);
        }
        acc.snapshot(x)
    }

    #[test]
    fn cyclic_only_dataset() {
        let recs = vec![PrimeRecord::new(5, 9, 1), PrimeRecord::new(7, 5, 1)];
        let rep = inclusion_exclusion_check(&recs, &[snap_of(&recs, 10, 4)]);
        assert!(rep.passed());
        assert_eq!(rep.rows[0].pi_c, 2);
        assert_eq!(rep.rows[0].mobius_sum, 2);
    }

    #[test]
    fn exponent_examples() {
        let rep = exponent_identity_check(&[PrimeRecord::new(5, 9, 1)]);
        assert!(rep.passed());
        assert_eq!(rep.exponent_sum, "9");
        let rep = exponent_identity_check(&[PrimeRecord::new(5, 8, 2)]);
        assert!(rep.passed());
        assert_eq!(rep.exponent_sum, "4");
        assert!(exponent_identity_check(&[]).passed());
        let bad = PrimeRecord { p: 5, ap: -2, n: 8, dp: 2, ep: 3 };
        assert_eq!(exponent_identity_check(&[bad]).first_offender, Some(5));
    }

    #[test]
    fn detects_a_corrupted_snapshot() {
        let recs = vec![PrimeRecord::new(5, 8, 2), PrimeRecord::new(7, 5, 1)];
        let mut s = snap_of(&recs, 10, 4);
        s.cyclic_count += 1;
        assert!(!inclusion_exclusion_check(&recs, &[s]).passed());
    }
}
