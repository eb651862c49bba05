//! Group structure of reductions and the division-field splitting test.

pub mod divpoly;
pub mod group;
pub mod poly;
pub mod weil;

pub use group::{
    group_structure, has_point_of_full_order, is_cyclic, m_torsion_rational,
    structure_by_enumeration, PrimeRecord,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("could not certify the {l}-part of the group structure at p = {p}")]
    Uncertified { p: u64, l: u64 },
    #[error("record for p = {p} violates {what}")]
    InvalidRecord { p: u64, what: &'static str },
}
