//! Cyclicity and exponent statistics of elliptic curves reduced modulo primes.

pub mod arith;
pub mod curve;
pub mod structure;
pub mod scan;
pub mod constants;
pub mod bounds;
pub mod cli;
