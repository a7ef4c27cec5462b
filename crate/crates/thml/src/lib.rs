//! Desk-scale laboratory for theta functions of Dirichlet characters mod p:
//! rigorous theta evaluation with error radii, mollified first and second
//! moments built from rough-number sets, non-vanishing censuses, and the
//! GCD-sum / multiplicative-energy combinatorics behind the mollifier choice.

pub mod cache;
pub mod char_group;
pub mod cli;
pub mod dft;
pub mod error;
pub mod gcd_energy;
pub mod highprec;
pub mod mollifier;
pub mod primes;
pub mod report;
pub mod sieve;
pub mod summation;
pub mod theta;
pub mod util;
pub mod verify;

pub use char_group::{CharIndex, CharacterGroup, Parity};
pub use error::{Error, Result};

/// Version tag baked into result envelopes and cache keys.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
