use serde::{Deserialize, Serialize};

use super::ScanError;
use crate::arith::Progression;
use crate::curve::count::{BSGS_MIN_P, DEFAULT_CROSSOVER, NAIVE_MAX_P};
use crate::curve::CurveSpec;

pub const DEFAULT_M_MAX: u64 = 100;
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Largest supported `x_max`; field arithmetic needs `p < 2^62`.
pub const X_MAX_LIMIT: u64 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub curve: CurveSpec,
    pub x_max: u64,
    pub q: u64,
    pub a: u64,
    pub checkpoints: Vec<u64>,
    pub m_max: u64,
    pub shards: usize,
    pub seed: u64,
    pub crossover: u64,
}

/// `10^k` and `2 * 10^k` from 10 up to `x_max`, then `x_max` itself.
pub fn default_checkpoints(x_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 10u64;
    while p <= x_max {
        out.push(p);
        if let Some(t) = p.checked_mul(2) {
            if t <= x_max {
                out.push(t);
            }
        }
        match p.checked_mul(10) {
            Some(n) => p = n,
            None => break,
        }
    }
    if out.last() != Some(&x_max) {
        out.push(x_max);
    }
    out
}

impl ScanConfig {
    pub fn new(curve: CurveSpec, x_max: u64, q: u64, a: u64) -> Self {
        ScanConfig {
            curve,
            x_max,
            q,
            a,
            checkpoints: default_checkpoints(x_max),
            m_max: DEFAULT_M_MAX,
            shards: 1,
            seed: DEFAULT_SEED,
            crossover: DEFAULT_CROSSOVER,
        }
    }

    pub fn progression(&self) -> Result<Progression, ScanError> {
        Ok(Progression::new(self.q, self.a)?)
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        self.curve.validate()?;
        self.progression()?;
        if self.x_max < 2 || self.x_max >= X_MAX_LIMIT {
            return Err(ScanError::Config(format!(
                "x_max must lie in [2, 2^62), got {}",
                self.x_max
            )));
        }
        if self.checkpoints.is_empty() {
            return Err(ScanError::Config("checkpoint list is empty".into()));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(ScanError::Config("checkpoints must be strictly ascending".into()));
        }
        if *self.checkpoints.last().unwrap() > self.x_max {
            return Err(ScanError::Config("checkpoints must not exceed x_max".into()));
        }
        if self.m_max == 0 {
            return Err(ScanError::Config("m_max must be at least 1".into()));
        }
        if self.shards == 0 {
            return Err(ScanError::Config("shards must be at least 1".into()));
        }
        if self.crossover < BSGS_MIN_P || self.crossover > NAIVE_MAX_P {
            return Err(ScanError::Config(format!(
                "crossover must lie in [{BSGS_MIN_P}, {NAIVE_MAX_P}], got {}",
                self.crossover
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_schedule() {
        assert_eq!(default_checkpoints(10), vec![10]);
        assert_eq!(default_checkpoints(1000), vec![10, 20, 100, 200, 1000]);
        assert_eq!(default_checkpoints(5000), vec![10, 20, 100, 200, 1000, 2000, 5000]);
        assert_eq!(default_checkpoints(5), vec![5]);
    }

    #[test]
    fn rejects_bad_progression_and_schedule() {
        let e = CurveSpec::new("e", 1, 1, 496).unwrap();
        let mut c = ScanConfig::new(e, 1000, 6, 3);
        assert!(matches!(c.validate(), Err(ScanError::Arith(_))));
        c.a = 1;
        assert!(c.validate().is_ok());
        c.checkpoints = vec![100, 50];
        assert!(c.validate().is_err());
        c.checkpoints = vec![100, 5000];
        assert!(c.validate().is_err());
        c.checkpoints = vec![100];
        c.crossover = 100;
        assert!(c.validate().is_err());
    }
}
