//! Integer and multiplicative-function substrate.

pub mod factor;
pub mod li;
pub mod multiplicative;
pub mod rational;
pub mod sieve;

pub use factor::{factorize, is_prime, valuation, Factorization};
pub use li::log_integral;
pub use multiplicative::{
    big_h, euler_phi, gcd, inner_mu_sum, lcm, mobius, omega, pair_coefficient, tau2,
};
pub use rational::Rational;
pub use sieve::{count_primes, primes_in_range, segmented_primes, Progression};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("residue {a} is not a unit modulo {q}")]
    InvalidProgression { q: u64, a: u64 },
    #[error("invalid prime range [{lo}, {hi}]")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("logarithmic integral needs x >= 2, got {0}")]
    Domain(f64),
}
