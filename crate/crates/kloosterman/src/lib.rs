//! Exact-arithmetic and floating-point toolkit for the general s-dimensional
//! hyper-Kloosterman sum K(m,s,χ;p) mod a prime p > 3.
//!
//! The crate evaluates the sums two independent ways (direct enumeration and
//! a Gauss-sum spectral decomposition), counts the solutions of the
//! multivariable congruences behind their power means in exact integers,
//! assembles the fourth power mean 2p^{2s+2} + error exactly from those
//! counts, and adjudicates every closed form against brute-force oracles.
//! The `verify` module packages the whole invariant suite, including the
//! errata report for the two closed forms that enumeration proves off by
//! one.
//!
//! Layout:
//! * [`context`]  — prime context: primitive root, discrete logs, inverses,
//!   additive character table, multiplicative characters.
//! * [`compsum`]  — compensated complex summation with error bounds.
//! * [`expsums`]  — Gauss sums, Jacobi sums, mixed moment of Gauss sums.
//! * [`hyperk`]   — K(m,s,χ;p) by enumeration and spectrally; grids, the
//!   (s+1)p^{s/2} bound, Sato-Tate moments.
//! * [`counts`]   — congruence solution counts, closed and brute-force.
//! * [`moments`]  — second/fourth power means, exact assembly, reports.
//! * [`verify`]   — the invariant suite and the errata report.

pub mod compsum;
pub mod context;
pub mod counts;
pub mod expsums;
mod fft;
pub mod hyperk;
pub mod moments;
pub mod verify;

pub use context::{
    build_context, char_orthogonality_check, is_prime, primes_in, Character, PrimeContext,
};
pub use counts::Family;

/// Unbounded signed integer used for all exact counts and moments.
pub type BigCount = num_bigint::BigInt;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("modulus must be a prime greater than 3, got {0}")]
    TooSmall(u64),
    #[error("computation too large: {size} exceeds guard {guard}")]
    TooLarge { size: String, guard: u128 },
    #[error("m \u{2261} 0 (mod p): the spectral route needs gcd(m,p) = 1")]
    ZeroM,
    #[error("family {0} has no closed form")]
    NoClosedForm(Family),
    #[error("invalid u for family {family}: {detail}")]
    BadU { family: Family, detail: String },
    #[error("exact division failed ({0}); this signals a broken formula or implementation")]
    NonIntegral(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
