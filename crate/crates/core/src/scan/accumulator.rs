use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScanError;
use crate::arith::factorize;
use crate::structure::PrimeRecord;

pub const FORMAT_VERSION: u32 = 1;

/// Running totals over the good primes of a progression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Accumulator {
    pub prime_count: u64,
    pub cyclic_count: u64,
    pub exponent_sum: u128,
    /// `split_counts[m - 1] = #{p : m | d_p}` for `1 <= m <= m_max`.
    split_counts: Vec<u64>,
    pub max_dp_seen: u64,
}

impl Accumulator {
    pub fn new(m_max: u64) -> Self {
        Accumulator {
            prime_count: 0,
            cyclic_count: 0,
            exponent_sum: 0,
            split_counts: vec![0; m_max as usize],
            max_dp_seen: 0,
        }
    }

    pub fn m_max(&self) -> u64 {
        self.split_counts.len() as u64
    }

    pub fn add(&mut self, r: &PrimeRecord) {
        self.prime_count += 1;
        if r.dp == 1 {
            self.cyclic_count += 1;
        }
        self.exponent_sum += r.ep as u128;
        self.max_dp_seen = self.max_dp_seen.max(r.dp);
        if r.dp == 1 {
            self.split_counts[0] += 1;
        } else {
            for m in factorize(r.dp).divisors() {
                if m > self.m_max() {
                    break;
                }
                self.split_counts[m as usize - 1] += 1;
            }
        }
    }

    /// Folds in the totals of a disjoint range.
    pub fn merge(&mut self, other: &Accumulator) {
        assert_eq!(self.m_max(), other.m_max());
        self.prime_count += other.prime_count;
        self.cyclic_count += other.cyclic_count;
        self.exponent_sum += other.exponent_sum;
        self.max_dp_seen = self.max_dp_seen.max(other.max_dp_seen);
        for (a, b) in self.split_counts.iter_mut().zip(&other.split_counts) {
            *a += b;
        }
    }

    /// `pi_{E,m}`: number of primes with `m | d_p`.
    pub fn pi_e_m(&self, m: u64) -> Result<u64, ScanError> {
        if m == 0 || m > self.m_max() {
            return Err(ScanError::MOutOfRange { m, m_max: self.m_max() });
        }
        Ok(self.split_counts[m as usize - 1])
    }

    pub fn split_counts(&self) -> &[u64] {
        &self.split_counts
    }

    /// Internal consistency: cyclic count bounded by the prime count,
    /// `pi_{E,1}` equals the prime count, and `pi_{E,m'} <= pi_{E,m}` for
    /// `m | m'`.
    pub fn check_invariants(&self) -> Result<(), ScanError> {
        if self.cyclic_count > self.prime_count {
            return Err(ScanError::Invariant("cyclic_count > prime_count".into()));
        }
        if self.split_counts[0] != self.prime_count {
            return Err(ScanError::Invariant("split_counts[1] != prime_count".into()));
        }
        let mm = self.m_max() as usize;
        for m in 1..=mm {
            for k in (2 * m..=mm).step_by(m) {
                if self.split_counts[k - 1] > self.split_counts[m - 1] {
                    return Err(ScanError::Invariant(format!(
                        "split count for {k} exceeds that for its divisor {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn snapshot(&self, x: u64) -> Snapshot {
        Snapshot {
            format_version: FORMAT_VERSION,
            x,
            prime_count: self.prime_count,
            cyclic_count: self.cyclic_count,
            exponent_sum: self.exponent_sum.to_string(),
            split_counts: self
                .split_counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (i as u64 + 1, c))
                .collect(),
            max_dp_seen: self.max_dp_seen,
        }
    }
}

/// The accumulator frozen at `x`, as written to checkpoint files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub x: u64,
    pub prime_count: u64,
    pub cyclic_count: u64,
    pub exponent_sum: String,
    pub split_counts: BTreeMap<u64, u64>,
    pub max_dp_seen: u64,
}

impl Snapshot {
    pub fn exponent_sum(&self) -> Result<u128, ScanError> {
        self.exponent_sum
            .parse()
            .map_err(|_| ScanError::Format(format!("bad exponent_sum {:?}", self.exponent_sum)))
    }

    pub fn pi_e_m(&self, m: u64) -> Result<u64, ScanError> {
        self.split_counts.get(&m).copied().ok_or(ScanError::MOutOfRange {
            m,
            m_max: self.split_counts.len() as u64,
        })
    }

    /// Rebuilds the accumulator; `split_counts` must cover `1..=m_max`.
    pub fn to_accumulator(&self) -> Result<Accumulator, ScanError> {
        if self.format_version != FORMAT_VERSION {
            return Err(ScanError::Format(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let m_max = self.split_counts.len() as u64;
        let mut acc = Accumulator::new(m_max);
        for (&m, &c) in &self.split_counts {
            if m == 0 || m > m_max {
                return Err(ScanError::Format("split_counts keys must be 1..=m_max".into()));
            }
            acc.split_counts[m as usize - 1] = c;
        }
        acc.prime_count = self.prime_count;
        acc.cyclic_count = self.cyclic_count;
        acc.exponent_sum = self.exponent_sum()?;
        acc.max_dp_seen = self.max_dp_seen;
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_divisors_of_dp() {
        let mut acc = Accumulator::new(12);
        acc.add(&PrimeRecord::new(5, 9, 1));
        acc.add(&PrimeRecord::new(5, 8, 2));
        acc.add(&PrimeRecord::new(13, 12, 2));
        assert_eq!(acc.prime_count, 3);
        assert_eq!(acc.cyclic_count, 1);
        assert_eq!(acc.exponent_sum, 9 + 4 + 6);
        assert_eq!(acc.pi_e_m(1).unwrap(), 3);
        assert_eq!(acc.pi_e_m(2).unwrap(), 2);
        assert_eq!(acc.pi_e_m(4).unwrap(), 0);
        assert!(acc.pi_e_m(13).is_err());
        acc.check_invariants().unwrap();
    }

    #[test]
    fn snapshot_round_trip() {
        let mut acc = Accumulator::new(4);
        acc.add(&PrimeRecord::new(5, 8, 2));
        let snap = acc.snapshot(10);
        let json = serde_json::to_string(&snap).unwrap();
        let back: Snapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_accumulator().unwrap(), acc);
    }
}
