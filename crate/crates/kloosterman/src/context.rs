//! Finite-field context for a fixed odd prime p and the multiplicative
//! characters mod p.
//!
//! For a prime p, (ℤ/pℤ)* is cyclic of order p−1. Fix the smallest primitive
//! root g. The character χ_k (k = 0 … p−2) is defined by
//! `chi_k(g^a) = exp(2*pi*i * k * a / (p-1))`,
//! so χ_0 is the principal character and products/conjugates of characters
//! are index arithmetic mod p−1. The context precomputes the discrete-log
//! table base g, the modular-inverse table, the additive character values
//! e(x/p) = exp(2πi·x/p), and the (p−1)-st roots of unity used to evaluate
//! characters.

use num_complex::Complex64;

use crate::{Error, Result};

/// Trial-division primality test. Fine for the table-driven sizes this
/// crate targets (p up to a few million).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    if n.is_multiple_of(3) {
        return n == 3;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// Primes p with lo ≤ p ≤ hi and p > 3, in increasing order.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(5)..=hi).filter(|&n| is_prime(n)).collect()
}

/// base^exponent mod modulus by binary exponentiation.
pub fn mod_pow(mut base: u64, mut exponent: u64, modulus: u64) -> u64 {
    debug_assert!(modulus < 1 << 32, "mod_pow squares must not overflow u64");
    base %= modulus;
    let mut acc = 1u64;
    while exponent > 0 {
        if exponent & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exponent >>= 1;
    }
    acc
}

/// Distinct prime factors of n by trial division.
fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            factors.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

/// Smallest primitive root of the prime p.
///
/// g is a primitive root iff g^((p−1)/q) ≢ 1 (mod p) for every prime q | p−1.
pub fn smallest_primitive_root(p: u64) -> u64 {
    let order = p - 1;
    let exponents: Vec<u64> = distinct_prime_factors(order)
        .iter()
        .map(|q| order / q)
        .collect();
    'candidate: for g in 2..p {
        for &e in &exponents {
            if mod_pow(g, e, p) == 1 {
                continue 'candidate;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root");
}

/// A multiplicative character mod p, encoded by its index k in [0, p−2]:
/// χ_k(g^a) = exp(2πi·k·a/(p−1)) for the smallest primitive root g.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Character {
    p: u64,
    index: u64,
}

impl Character {
    pub fn new(p: u64, index: u64) -> Self {
        Self {
            p,
            index: index % (p - 1),
        }
    }

    /// The principal character χ_0.
    pub fn principal(p: u64) -> Self {
        Self { p, index: 0 }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    /// Pointwise product of characters: indices add mod p−1.
    pub fn mul(&self, other: &Character) -> Character {
        assert_eq!(self.p, other.p, "character moduli must match");
        Character::new(self.p, self.index + other.index)
    }

    /// Complex conjugate (= inverse) character: index p−1−k mod p−1.
    pub fn conjugate(&self) -> Character {
        Character::new(self.p, (self.p - 1) - self.index)
    }

    /// χ_k(−1) = (−1)^k, since −1 = g^((p−1)/2).
    pub fn sign_at_minus_one(&self) -> f64 {
        if self.index.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Precomputed tables for arithmetic mod a fixed prime p > 3.
///
/// Immutable after construction; all downstream sums are table lookups.
#[derive(Debug, Clone)]
pub struct PrimeContext {
    p: u64,
    g: u64,
    /// dlog[x] = a with g^a ≡ x (mod p) for x in [1, p−1]; dlog[0] is a sentinel.
    dlog: Vec<u32>,
    /// inv[x]·x ≡ 1 (mod p) for x in [1, p−1]; inv[0] is a sentinel.
    inv: Vec<u32>,
    /// addchar[x] = e(x/p) = exp(2πi·x/p).
    addchar: Vec<Complex64>,
    /// unit_roots[j] = exp(2πi·j/(p−1)).
    unit_roots: Vec<Complex64>,
}

/// Build the full context for a prime p > 3.
///
/// The primitive root is the smallest one, so outputs are reproducible.
pub fn build_context(p: u64) -> Result<PrimeContext> {
    if p <= 3 {
        return Err(Error::TooSmall(p));
    }
    if !is_prime(p) {
        return Err(Error::NonPrime(p));
    }
    let g = smallest_primitive_root(p);
    let n = p - 1;

    let mut dlog = vec![u32::MAX; p as usize];
    let mut inv = vec![0u32; p as usize];
    let mut pow_g = vec![0u64; n as usize];
    let mut val = 1u64;
    for a in 0..n {
        pow_g[a as usize] = val;
        debug_assert_eq!(dlog[val as usize], u32::MAX);
        dlog[val as usize] = a as u32;
        val = val * g % p;
    }
    debug_assert_eq!(val, 1, "g must have order p-1");
    for a in 0..n {
        // inverse of g^a is g^(n-a)
        inv[pow_g[a as usize] as usize] = pow_g[((n - a) % n) as usize] as u32;
    }

    let tau = std::f64::consts::TAU;
    let addchar = (0..p)
        .map(|x| {
            let (s, c) = (tau * x as f64 / p as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    let unit_roots = (0..n)
        .map(|j| {
            let (s, c) = (tau * j as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();

    Ok(PrimeContext {
        p,
        g,
        dlog,
        inv,
        addchar,
        unit_roots,
    })
}

impl PrimeContext {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Order of the unit group, p−1.
    pub fn order(&self) -> u64 {
        self.p - 1
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Discrete log base g of x ∈ [1, p−1].
    #[inline]
    pub fn dlog(&self, x: u64) -> u64 {
        debug_assert!(x >= 1 && x < self.p);
        self.dlog[x as usize] as u64
    }

    /// Multiplicative inverse of x ∈ [1, p−1].
    #[inline]
    pub fn inv(&self, x: u64) -> u64 {
        debug_assert!(x >= 1 && x < self.p);
        self.inv[x as usize] as u64
    }

    /// e(x/p) = exp(2πi·x/p) for x ∈ [0, p−1].
    #[inline]
    pub fn addchar(&self, x: u64) -> Complex64 {
        self.addchar[x as usize]
    }

    /// exp(2πi·j/(p−1)) for j ∈ [0, p−2].
    #[inline]
    pub fn unit_root(&self, j: u64) -> Complex64 {
        self.unit_roots[j as usize]
    }

    pub fn character(&self, index: u64) -> Character {
        Character::new(self.p, index)
    }

    /// All p−1 characters in index order.
    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        (0..self.order()).map(move |k| Character::new(self.p, k))
    }

    /// χ(x), with the convention χ(0) = 0 for every character.
    #[inline]
    pub fn char_eval(&self, chi: Character, x: u64) -> Complex64 {
        assert_eq!(chi.p, self.p, "character belongs to a different context");
        debug_assert!(x < self.p);
        if x == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.p - 1;
        self.unit_roots[(chi.index * self.dlog(x) % n) as usize]
    }

    /// Test hook: deliberately corrupt the discrete-log entry for x so that
    /// consistency checks can be shown to detect a broken table.
    #[doc(hidden)]
    pub fn corrupt_dlog_entry(&mut self, x: u64) {
        assert!(x >= 1 && x < self.p);
        let n = (self.p - 1) as u32;
        self.dlog[x as usize] = (self.dlog[x as usize] + 1) % n;
    }
}

/// Character orthogonality: Σ_{x=1}^{p−1} χ_k(x) = 0 for every k ≠ 0, and
/// Σ_k χ_k(x) = (p−1)·[x ≡ 1] for every x. True iff both hold within a
/// tolerance scaled by p.
pub fn char_orthogonality_check(ctx: &PrimeContext) -> bool {
    let p = ctx.p();
    let n = ctx.order();
    let tol = 1e-9 * p as f64;

    for k in 1..n {
        let mut sum = Complex64::new(0.0, 0.0);
        for x in 1..p {
            sum += ctx.unit_root(k * ctx.dlog(x) % n);
        }
        if sum.norm() > tol {
            return false;
        }
    }
    for x in 1..p {
        let a = ctx.dlog(x);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..n {
            sum += ctx.unit_root(k * a % n);
        }
        let expected = if x == 1 { n as f64 } else { 0.0 };
        if (sum - expected).norm() > tol {
            return false;
        }
    }
    true
}
