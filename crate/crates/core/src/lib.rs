//! Computational laboratory for integers `n` whose shifts `n + k` all have few
//! prime factors.
//!
//! The crate builds a weighted probability measure on `[x, 2x]` from
//! products of squared Selberg-type sieve weights, checks its divisibility
//! properties exactly against brute-force enumeration, and provides the
//! combinatorial and random-model machinery used to study tail bounds for
//! `Ω(n + k)`.

pub mod bump;
pub mod cramer;
pub mod error;
pub mod moments;
pub mod primes;
mod quad;
pub mod report;
pub mod sieve;
mod sum;

pub use error::{Error, Result};
