use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::point::ReducedCurve;
use super::CurveError;
use crate::arith::{factorize, is_prime};

/// A curve `y^2 = x^3 + a4 x + a6` over the rationals together with the
/// arithmetic data that cannot be computed here and must be supplied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub label: String,
    pub a4: i64,
    pub a6: i64,
    pub conductor: u64,
    /// Primes skipped by every scan.
    pub bad_primes: BTreeSet<u64>,
    /// `D` when the curve has CM by the maximal order of `Q(sqrt(-D))`.
    pub cm_disc: Option<u64>,
    /// The exceptional set `S_E` of primes with non-surjective mod-l image.
    pub serre_primes: Option<BTreeSet<u64>>,
    pub b_e: Option<u64>,
}

/// `4 a4^3 + 27 a6^2`, so that the discriminant is `-16` times this.
pub fn disc_core(a4: i64, a6: i64) -> i128 {
    let a4 = a4 as i128;
    let a6 = a6 as i128;
    4 * a4 * a4 * a4 + 27 * a6 * a6
}

/// `{2}` together with the primes dividing `4 a4^3 + 27 a6^2`.
pub fn default_bad_primes(a4: i64, a6: i64) -> BTreeSet<u64> {
    let mut out = BTreeSet::from([2u64]);
    let mut d = disc_core(a4, a6).unsigned_abs();
    // Strip factors that do not fit a u64 factorization in one go.
    let mut l = 3u128;
    while d > u64::MAX as u128 && l * l <= d {
        if d % l == 0 {
            out.insert(l as u64);
            while d % l == 0 {
                d /= l;
            }
        }
        l += 2;
    }
    if d > 1 {
        out.extend(factorize(d as u64).primes());
    }
    out
}

impl CurveSpec {
    /// Builds a spec with default bad primes and no optional metadata.
    pub fn new(label: &str, a4: i64, a6: i64, conductor: u64) -> Result<Self, CurveError> {
        let spec = CurveSpec {
            label: label.to_string(),
            a4,
            a6,
            conductor,
            bad_primes: default_bad_primes(a4, a6),
            cm_disc: None,
            serre_primes: None,
            b_e: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cm(mut self, d: u64) -> Self {
        self.cm_disc = Some(d);
        self
    }

    pub fn with_serre_primes(mut self, s: impl IntoIterator<Item = u64>) -> Self {
        self.serre_primes = Some(s.into_iter().collect());
        self
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        if disc_core(self.a4, self.a6) == 0 {
            return Err(CurveError::Singular);
        }
        if self.conductor == 0 {
            return Err(CurveError::BadConductor(0));
        }
        for &p in &self.bad_primes {
            if !is_prime(p) {
                return Err(CurveError::NotPrime(p));
            }
        }
        for l in factorize(self.conductor).primes() {
            if !self.bad_primes.contains(&l) {
                return Err(CurveError::ConductorPrimeNotBad(l));
            }
        }
        if let Some(s) = &self.serre_primes {
            for &l in s {
                if !is_prime(l) {
                    return Err(CurveError::NotPrime(l));
                }
            }
        }
        if self.b_e == Some(0) {
            return Err(CurveError::BadConstant);
        }
        if self.cm_disc == Some(0) {
            return Err(CurveError::BadConstant);
        }
        Ok(())
    }

    pub fn is_cm(&self) -> bool {
        self.cm_disc.is_some()
    }

    /// `A(E) = 2 * 3 * 5 * prod_{l in S_E, l > 5} l`, if `S_E` is known and the
    /// curve is not CM.
    pub fn serre_constant(&self) -> Option<u64> {
        if self.is_cm() {
            return None;
        }
        let s = self.serre_primes.as_ref()?;
        Some(30 * s.iter().filter(|&&l| l > 5).product::<u64>())
    }

    /// `M_E`: product of the primes dividing `A(E) N_E`.
    pub fn m_e(&self, a_e: u64) -> u64 {
        let mut primes: BTreeSet<u64> = factorize(a_e).primes().collect();
        primes.extend(factorize(self.conductor).primes());
        primes.into_iter().product()
    }

    pub fn is_bad(&self, p: u64) -> bool {
        self.bad_primes.contains(&p)
    }
}

/// Result of reducing a curve at a prime.
#[derive(Clone, Debug)]
pub enum Reduction {
    Good(ReducedCurve),
    Bad,
}

/// Reduces `spec` modulo the prime `p`. Primes in `bad_primes` give
/// [`Reduction::Bad`]; a singular reduction at any other prime is an error,
/// since the bad-prime set is meant to cover the discriminant.
pub fn reduce_curve(spec: &CurveSpec, p: u64) -> Result<Reduction, CurveError> {
    if spec.is_bad(p) {
        return Ok(Reduction::Bad);
    }
    if p == 2 {
        return Err(CurveError::SingularAt(p));
    }
    match ReducedCurve::new(p, spec.a4, spec.a6) {
        Some(c) => Ok(Reduction::Good(c)),
        None => Err(CurveError::SingularAt(p)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_primes_of_x3_x_1() {
        let e = CurveSpec::new("x3+x+1", 1, 1, 496).unwrap();
        assert_eq!(e.bad_primes, BTreeSet::from([2, 31]));
        assert!(matches!(reduce_curve(&e, 31).unwrap(), Reduction::Bad));
        assert!(matches!(reduce_curve(&e, 2).unwrap(), Reduction::Bad));
        match reduce_curve(&e, 5).unwrap() {
            Reduction::Good(c) => {
                assert_eq!(c.field.to_u64(c.a4), 1);
                assert_eq!(c.field.to_u64(c.a6), 1);
            }
            Reduction::Bad => panic!("5 is good"),
        }
    }

    #[test]
    fn congruent_number_curve() {
        let e = CurveSpec::new("x3-x", -1, 0, 32).unwrap();
        assert_eq!(e.bad_primes, BTreeSet::from([2]));
        assert!(matches!(reduce_curve(&e, 2).unwrap(), Reduction::Bad));
    }

    #[test]
    fn rejects_inconsistent_metadata() {
        assert_eq!(CurveSpec::new("s", 0, 0, 1), Err(CurveError::Singular));
        assert_eq!(
            CurveSpec::new("c", 1, 1, 496 * 3),
            Err(CurveError::ConductorPrimeNotBad(3))
        );
    }

    #[test]
    fn serre_constant_and_m_e() {
        let e = CurveSpec::new("g", 6, -2, 1728).unwrap().with_serre_primes([]);
        assert_eq!(e.serre_constant(), Some(30));
        assert_eq!(e.m_e(30), 30);
        let e = e.with_serre_primes([2, 7]);
        assert_eq!(e.serre_constant(), Some(210));
        let cm = CurveSpec::new("cm", -1, 0, 32).unwrap().with_cm(1);
        assert_eq!(cm.serre_constant(), None);
    }
}
