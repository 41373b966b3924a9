//! Gauss sums, Jacobi sums, and the normalized mixed moment of Gauss sums.
//!
//! The Gauss sum here carries a leading minus sign,
//!   G(χ) = −Σ_{x=1}^{p−1} χ(x)·e(x/p),
//! so that G(χ_0) = 1, and the spectral Kloosterman formula in `hyperk` uses
//! the same convention. Under it |G(χ)|² = p and G(χ)G(χ̄) = p·χ(−1) for
//! non-principal χ, while the classical Jacobi relation picks up a sign:
//! J(χ,ψ) = −G(χ)G(ψ)/G(χψ) whenever χ, ψ, χψ are all non-principal.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::compsum::ComplexSum;
use crate::context::{Character, PrimeContext};
use crate::fft::dft_bluestein;

/// G(χ) = −Σ_{x=1}^{p−1} χ(x)·e(x/p), by compensated summation over x.
pub fn gauss_sum(ctx: &PrimeContext, chi: Character) -> Complex64 {
    let p = ctx.p();
    let mut acc = ComplexSum::new();
    for x in 1..p {
        acc.add(ctx.char_eval(chi, x) * ctx.addchar(x));
    }
    -acc.value()
}

/// How to build the full table of Gauss sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMethod {
    /// The defining O(p²) double loop in discrete-log coordinates.
    Direct,
    /// One length-(p−1) Bluestein DFT of a ↦ e(g^a/p); O(p log p).
    Fast,
}

/// All p−1 Gauss sums, indexed by character index.
#[derive(Debug, Clone)]
pub struct GaussTable {
    p: u64,
    values: Vec<Complex64>,
}

impl GaussTable {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// G(χ_k).
    #[inline]
    pub fn get(&self, k: u64) -> Complex64 {
        self.values[k as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Build the Gauss-sum table. In discrete-log coordinates
/// G(χ_k) = −Σ_{a=0}^{p−2} ω^{ka}·e(g^a/p) with ω = exp(2πi/(p−1)), which is
/// a length-(p−1) DFT of the reordered additive values; `Direct` evaluates it
/// literally, `Fast` through Bluestein. The two agree within 1e−8 absolute
/// for p up to 10⁴.
pub fn gauss_table(ctx: &PrimeContext, method: TableMethod) -> GaussTable {
    let p = ctx.p();
    let n = ctx.order();
    // f[a] = e(g^a / p)
    let mut x = 1u64;
    let mut f = Vec::with_capacity(n as usize);
    for _ in 0..n {
        f.push(ctx.addchar(x));
        x = x * ctx.generator() % p;
    }

    let values = match method {
        TableMethod::Direct => (0..n)
            .into_par_iter()
            .map(|k| {
                let mut acc = ComplexSum::new();
                for (a, fa) in f.iter().enumerate() {
                    acc.add(fa * ctx.unit_root(k * a as u64 % n));
                }
                -acc.value()
            })
            .collect(),
        TableMethod::Fast => dft_bluestein(&f).into_iter().map(|v| -v).collect(),
    };
    GaussTable { p, values }
}

/// How to evaluate a Jacobi sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobiMethod {
    /// The defining sum Σ_{x=2}^{p−1} χ(x)·ψ(1−x).
    Direct,
    /// Via Gauss sums, with the degenerate cases tabulated.
    Gauss,
}

/// J(χ,ψ) = Σ_{x=2}^{p−1} χ(x)·ψ(1−x).
///
/// The `Gauss` route uses J = −G(χ)G(ψ)/G(χψ) when χ, ψ, χψ are all
/// non-principal (the sign comes from the signed Gauss convention) and the
/// values forced by the defining sum otherwise:
/// J(χ_0,χ_0) = p−2, J(χ,χ_0) = J(χ_0,ψ) = −1, J(χ,χ̄) = −χ(−1).
pub fn jacobi_sum(
    ctx: &PrimeContext,
    chi: Character,
    psi: Character,
    method: JacobiMethod,
) -> Complex64 {
    let p = ctx.p();
    match method {
        JacobiMethod::Direct => {
            let mut acc = ComplexSum::new();
            for x in 2..p {
                acc.add(ctx.char_eval(chi, x) * ctx.char_eval(psi, (p + 1 - x) % p));
            }
            acc.value()
        }
        JacobiMethod::Gauss => {
            let prod = chi.mul(&psi);
            if chi.is_principal() && psi.is_principal() {
                Complex64::new((p - 2) as f64, 0.0)
            } else if chi.is_principal() || psi.is_principal() {
                Complex64::new(-1.0, 0.0)
            } else if prod.is_principal() {
                Complex64::new(-chi.sign_at_minus_one(), 0.0)
            } else {
                -(gauss_sum(ctx, chi) * gauss_sum(ctx, psi)) / gauss_sum(ctx, prod)
            }
        }
    }
}

/// The fixed instance of the normalized mixed moment of Gauss sums computed
/// by [`mixed_moment_sigma`]: rank-3 character tuples, four exponent rows,
/// a single −1 twist on the first coordinate, and exponents (s,s,−s,−s).
#[derive(Debug, Clone, Copy)]
pub struct MixedMomentSpec {
    pub rank: usize,
    pub exponent_rows: [[i64; 3]; 4],
    pub twists: [[i64; 3]; 4],
    pub exponents_for: fn(s: u32) -> [i64; 4],
}

pub const MIXED_MOMENT_SPEC: MixedMomentSpec = MixedMomentSpec {
    rank: 3,
    exponent_rows: [[1, 0, 0], [0, 1, 0], [1, 0, 1], [0, 1, -1]],
    twists: [[1, 1, -1], [1, 1, 1], [1, 1, 1], [1, 1, 1]],
    exponents_for: |s| [s as i64, s as i64, -(s as i64), -(s as i64)],
};

impl MixedMomentSpec {
    /// No two exponent rows may be proportional; checked over the rationals
    /// by vanishing 2×2 minors.
    pub fn rows_pairwise_nonproportional(&self) -> bool {
        for i in 0..4 {
            for j in i + 1..4 {
                let (r, t) = (self.exponent_rows[i], self.exponent_rows[j]);
                let proportional = (0..3).all(|a| {
                    (a + 1..3).all(|b| r[a] * t[b] == r[b] * t[a])
                });
                if proportional {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of the normalized mixed-moment sum.
#[derive(Debug, Clone, Copy)]
pub struct MixedMoment {
    /// |S₁|⁻¹ · Σ over admissible triples of the unimodular summand.
    pub value: Complex64,
    /// |S₁|: the number of admissible triples.
    pub admissible_triples: u64,
}

/// Average over triples (χ₁,χ₂,χ₃) with χ₁,χ₂,χ₃ ≠ χ₀, χ₁χ₃ ≠ χ₀ and
/// χ₂χ̄₃ ≠ χ₀ of
///   χ₃(−1)^s · G(χ₁)^s G(χ₂)^s / (G(χ₁χ₃)^s G(χ₂χ̄₃)^s),
/// normalized by the number |S₁| of admissible triples. Every factor
/// p^{−s/2}·G(·) is unimodular, so each summand has modulus 1 and the
/// average is at most 1 in modulus.
pub fn mixed_moment_sigma(ctx: &PrimeContext, table: &GaussTable, s: u32) -> MixedMoment {
    let n = ctx.order();
    let sqrt_p = (ctx.p() as f64).sqrt();

    // ghat[k] = (G(chi_k)/sqrt(p))^s is unimodular, so its inverse is its
    // conjugate; each summand is then four multiplications.
    let ghat_pow: Vec<Complex64> = (0..n)
        .map(|k| {
            let g = table.get(k) / sqrt_p;
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..s {
                acc *= g;
            }
            acc
        })
        .collect();

    let per_k1: Vec<(Complex64, u64)> = (1..n)
        .into_par_iter()
        .map(|k1| {
            let mut acc = ComplexSum::new();
            let mut count = 0u64;
            for k2 in 1..n {
                for k3 in 1..n {
                    let i13 = (k1 + k3) % n;
                    if i13 == 0 {
                        continue;
                    }
                    let i23 = (k2 + n - k3) % n;
                    if i23 == 0 {
                        continue;
                    }
                    count += 1;
                    let mut term = ghat_pow[k1 as usize]
                        * ghat_pow[k2 as usize]
                        * ghat_pow[i13 as usize].conj()
                        * ghat_pow[i23 as usize].conj();
                    if (k3 * s as u64) % 2 == 1 {
                        // chi_3(-1)^s = (-1)^{k3 s}
                        term = -term;
                    }
                    acc.add(term);
                }
            }
            (acc.value(), count)
        })
        .collect();

    let mut total = ComplexSum::new();
    let mut admissible = 0u64;
    for (v, c) in per_k1 {
        total.add(v);
        admissible += c;
    }
    MixedMoment {
        value: total.value() / admissible as f64,
        admissible_triples: admissible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::build_context;

    #[test]
    fn gauss_sum_small_values() {
        let ctx = build_context(5).unwrap();
        // G(chi_0) = -(sum of all nontrivial e(x/5)) = 1
        let g0 = gauss_sum(&ctx, ctx.character(0));
        assert!((g0 - 1.0).norm() < 1e-12);
        // quadratic character: the classical sum is +sqrt(5), negated here
        let g2 = gauss_sum(&ctx, ctx.character(2));
        assert!((g2 - Complex64::new(-(5.0f64.sqrt()), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gauss_modulus_and_conjugate_identity() {
        for p in [7u64, 11, 13] {
            let ctx = build_context(p).unwrap();
            for chi in ctx.characters().skip(1) {
                let g = gauss_sum(&ctx, chi);
                assert!((g.norm_sqr() - p as f64).abs() < 1e-9 * p as f64);
                let gc = gauss_sum(&ctx, chi.conjugate());
                let expected = Complex64::new(p as f64 * chi.sign_at_minus_one(), 0.0);
                assert!((g * gc - expected).norm() < 1e-9 * p as f64);
            }
        }
    }

    #[test]
    fn table_methods_agree() {
        // the contract is 1e-8 absolute agreement for p up to 10^4
        for p in [5u64, 31, 97, 997, 9973] {
            let ctx = build_context(p).unwrap();
            let direct = gauss_table(&ctx, TableMethod::Direct);
            let fast = gauss_table(&ctx, TableMethod::Fast);
            let mut max_diff = 0.0f64;
            for k in 0..ctx.order() {
                max_diff = max_diff.max((direct.get(k) - fast.get(k)).norm());
            }
            assert!(max_diff < 1e-8, "p={p}: max diff {max_diff}");
            assert!((direct.get(0) - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn jacobi_degenerate_values() {
        let ctx = build_context(7).unwrap();
        let chi0 = ctx.character(0);
        let j00 = jacobi_sum(&ctx, chi0, chi0, JacobiMethod::Direct);
        assert!((j00 - 5.0).norm() < 1e-12); // p-2 ones

        for k in 1..6 {
            let chi = ctx.character(k);
            for (a, b) in [(chi, chi0), (chi0, chi)] {
                let direct = jacobi_sum(&ctx, a, b, JacobiMethod::Direct);
                assert!((direct + 1.0).norm() < 1e-12);
            }
            let self_conj = jacobi_sum(&ctx, chi, chi.conjugate(), JacobiMethod::Direct);
            let expected = Complex64::new(-chi.sign_at_minus_one(), 0.0);
            assert!((self_conj - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn jacobi_methods_agree_exhaustively() {
        for p in [5u64, 7, 13, 31] {
            let ctx = build_context(p).unwrap();
            for chi in ctx.characters() {
                for psi in ctx.characters() {
                    let d = jacobi_sum(&ctx, chi, psi, JacobiMethod::Direct);
                    let g = jacobi_sum(&ctx, chi, psi, JacobiMethod::Gauss);
                    assert!(
                        (d - g).norm() < 1e-9,
                        "p={p} chi={} psi={}: {d} vs {g}",
                        chi.index(),
                        psi.index()
                    );
                }
            }
        }
    }

    #[test]
    fn jacobi_modulus_in_generic_case() {
        let ctx = build_context(7).unwrap();
        for j in 1..6 {
            for k in 1..6 {
                if (j + k) % 6 == 0 {
                    continue;
                }
                let v = jacobi_sum(&ctx, ctx.character(j), ctx.character(k), JacobiMethod::Gauss);
                assert!((v.norm() - 7.0f64.sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fixed_instance_rows_are_nonproportional() {
        assert!(MIXED_MOMENT_SPEC.rows_pairwise_nonproportional());
        assert_eq!((MIXED_MOMENT_SPEC.exponents_for)(2), [2, 2, -2, -2]);
    }

    #[test]
    #[allow(clippy::manual_is_multiple_of)] // `% n != 0` reads as the congruence it is
    fn mixed_moment_is_average_of_unimodular_terms() {
        let ctx = build_context(11).unwrap();
        let table = gauss_table(&ctx, TableMethod::Direct);
        for s in 1..=3 {
            let mm = mixed_moment_sigma(&ctx, &table, s);
            assert!(mm.value.norm() <= 1.0 + 1e-12);
        }
        // |S_1| for p=11: triples (k1,k2,k3) in [1,9]^3 with k1+k3 != 0 and
        // k2-k3 != 0 mod 10, counted directly
        let n = 10u64;
        let mut expected = 0u64;
        for k1 in 1..n {
            for k2 in 1..n {
                for k3 in 1..n {
                    if (k1 + k3) % n != 0 && (k2 + n - k3) % n != 0 {
                        expected += 1;
                    }
                }
            }
        }
        let mm = mixed_moment_sigma(&ctx, &table, 1);
        assert_eq!(mm.admissible_triples, expected);
    }

    #[test]
    fn mixed_moment_real_for_even_exponent() {
        let ctx = build_context(13).unwrap();
        let table = gauss_table(&ctx, TableMethod::Direct);
        let mm = mixed_moment_sigma(&ctx, &table, 2);
        assert!(mm.value.im.abs() < 1e-9);
    }
}
