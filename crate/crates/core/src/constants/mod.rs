//! Density constants for cyclicity and for the exponent sum, truncated at
//! `M`, from closed forms or from measured split densities.

pub mod agreement;
pub mod degree;
pub mod estimate;

pub use agreement::{agreement_row, backend_agreement, AgreementRow, AGREEMENT_SIGMAS};
pub use degree::{gl2_order, generic_degree, kronecker, DegreeModel, TwoDivision};
pub use estimate::{
    c_constant, e_constant, empirical_delta, truncation_bound, universal_euler_product,
    universal_smooth_sum, phi_square_tail, Backend, DensityEstimate, ExponentForm, Kind, Provenance, SplitSample,
    Term, DEFAULT_M_EMPIRICAL, DEFAULT_M_EXACT, MIN_SAMPLE,
};

use thiserror::Error;

use crate::arith::ArithError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("{0}")]
    Domain(&'static str),
    #[error("m = {m} shares a factor with A(E) = {a_e}; no closed-form degree")]
    NotGeneric { m: u64, a_e: u64 },
    #[error("no closed-form degree for m in {ms:?}; use the hybrid or empirical backend")]
    Infeasible { ms: Vec<u64> },
    #[error("holdout has {count} primes, need at least {needed}")]
    InsufficientSample { count: u64, needed: u64 },
    #[error("empirical terms requested but no scan data supplied")]
    MissingSample,
    #[error("scan data does not match: {0}")]
    SampleMismatch(String),
}
