//! Prime fields and short Weierstrass curves over them.

pub mod count;
pub mod field;
pub mod point;
pub mod spec;

pub use count::{group_order, hasse_interval, point_count_bsgs, point_count_naive, point_order};
pub use field::{Fe, Fp};
pub use point::{Point, ReducedCurve};
pub use spec::{reduce_curve, CurveSpec, Reduction};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("curve is singular over the rationals")]
    Singular,
    #[error("curve is singular at {0}, which is not listed as a bad prime")]
    SingularAt(u64),
    #[error("conductor must be positive, got {0}")]
    BadConductor(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} divides the conductor but is not a bad prime")]
    ConductorPrimeNotBad(u64),
    #[error("B_E and D must be positive")]
    BadConstant,
    #[error("point count {n} at p = {p} violates the Hasse bound")]
    HasseViolation { p: u64, n: u64 },
    #[error("no order in the Hasse interval at p = {p}")]
    NoOrderInInterval { p: u64 },
    #[error("group order at p = {p} still ambiguous after all rounds")]
    Ambiguous { p: u64 },
    #[error("naive counting is limited to p <= 10^6, got {0}")]
    NaiveTooLarge(u64),
    #[error("baby-step giant-step needs p >= 458, got {0}")]
    BsgsTooSmall(u64),
}
