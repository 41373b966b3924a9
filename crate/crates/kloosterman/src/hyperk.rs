//! The general s-dimensional hyper-Kloosterman sum
//!   K(m,s,χ;p) = Σ_{x₁..x_s ∈ [1,p−1]} χ(x₁⋯x_s)·e((x₁+⋯+x_s + m·(x₁⋯x_s)⁻¹)/p)
//! evaluated two independent ways: direct s-fold enumeration, and a spectral
//! decomposition through Gauss sums that costs O(p) per value,
//!   K(m,s,χ;p) = (1/(p−1)) Σ_ψ ψ̄(m)·(−1)^{s+1}·G(ψ)·G(χψ)^s   (gcd(m,p)=1).
//! The two routes must agree; the test suites check that exhaustively at
//! small p before anything downstream leans on the spectral form.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::compsum::ComplexSum;
use crate::context::{Character, PrimeContext};
use crate::expsums::GaussTable;
use crate::{Error, Result};

/// Guard for direct enumeration: at most this many tuples.
pub const ENUMERATION_GUARD: u128 = 100_000_000;

/// Parameters of one sum K(m,s,χ;p).
#[derive(Debug, Clone, Copy)]
pub struct KParams {
    pub m: u64,
    pub s: u32,
    pub chi: Character,
}

/// Direct evaluation by odometer iteration over all (p−1)^s tuples.
pub fn k_naive(ctx: &PrimeContext, q: &KParams) -> Result<Complex64> {
    let p = ctx.p();
    let s = q.s as usize;
    assert!(s >= 1, "dimension s must be at least 1");
    let tuples = (0..s).try_fold(1u128, |acc, _| {
        let next = acc.checked_mul((p - 1) as u128)?;
        (next <= ENUMERATION_GUARD).then_some(next)
    });
    if tuples.is_none() {
        return Err(Error::TooLarge {
            size: format!("(p-1)^{s} tuples"),
            guard: ENUMERATION_GUARD,
        });
    }
    let m = q.m % p;

    // odometer with prefix products and sums; position i covers x_1..x_{i+1}
    let mut digits = vec![1u64; s];
    let mut prod = vec![1u64; s + 1];
    let mut sum = vec![0u64; s + 1];
    for i in 0..s {
        prod[i + 1] = prod[i] * digits[i] % p;
        sum[i + 1] = (sum[i] + digits[i]) % p;
    }

    let mut acc = ComplexSum::new();
    loop {
        let u = prod[s];
        let t = sum[s];
        let phase = (t + m * ctx.inv(u)) % p;
        acc.add(ctx.char_eval(q.chi, u) * ctx.addchar(phase));

        // increment rightmost digit, carrying leftward
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(acc.value());
            }
            digits[i - 1] += 1;
            if digits[i - 1] < p {
                break;
            }
            digits[i - 1] = 1;
            i -= 1;
        }
        for j in i - 1..s {
            prod[j + 1] = prod[j] * digits[j] % p;
            sum[j + 1] = (sum[j] + digits[j]) % p;
        }
    }
}

/// Closed form at m = 0: K(0,s,χ) = (−G(χ))^s.
pub fn k_zero(table: &GaussTable, s: u32, chi: Character) -> Complex64 {
    let g = -table.get(chi.index());
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..s {
        acc *= g;
    }
    acc
}

/// Spectral evaluation through the Gauss-sum table; requires gcd(m,p) = 1.
pub fn k_spectral(ctx: &PrimeContext, table: &GaussTable, q: &KParams) -> Result<Complex64> {
    let p = ctx.p();
    let n = ctx.order();
    let m = q.m % p;
    if m == 0 {
        return Err(Error::ZeroM);
    }
    let a_m = ctx.dlog(m);
    let k = q.chi.index();

    let mut acc = ComplexSum::new();
    for j in 0..n {
        // psi_bar(m) for psi = chi_j
        let psi_bar_m = ctx.unit_root((n - j * a_m % n) % n);
        let mut g_pow = Complex64::new(1.0, 0.0);
        let g_prod = table.get((j + k) % n);
        for _ in 0..q.s {
            g_pow *= g_prod;
        }
        acc.add(psi_bar_m * table.get(j) * g_pow);
    }
    let sign = if q.s.is_multiple_of(2) { -1.0 } else { 1.0 }; // (-1)^{s+1}
    Ok(acc.value() * sign / n as f64)
}

/// All values K(m,s,χ_k;p) for m ∈ [1,p−1], k ∈ [0,p−2], via the spectral
/// route. Rows are filled independently in parallel and stored in a fixed
/// (m outer, k inner) order, so the result does not depend on worker count.
#[derive(Debug, Clone)]
pub struct KGrid {
    p: u64,
    s: u32,
    values: Vec<Complex64>,
}

impl KGrid {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// K(m,s,χ_k;p) for m ∈ [1,p−1], k ∈ [0,p−2].
    #[inline]
    pub fn entry(&self, m: u64, k: u64) -> Complex64 {
        let n = self.p - 1;
        debug_assert!(m >= 1 && m < self.p && k < n);
        self.values[((m - 1) * n + k) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

pub fn k_grid(ctx: &PrimeContext, table: &GaussTable, s: u32) -> KGrid {
    let p = ctx.p();
    let n = ctx.order();
    let values: Vec<Complex64> = (1..p)
        .into_par_iter()
        .flat_map_iter(|m| {
            (0..n).map(move |k| {
                let q = KParams {
                    m,
                    s,
                    chi: ctx.character(k),
                };
                k_spectral(ctx, table, &q).expect("m in [1,p-1] is invertible")
            })
        })
        .collect();
    KGrid { p, s, values }
}

/// Outcome of checking |K| ≤ (s+1)·p^{s/2} over a full grid.
#[derive(Debug, Clone, Copy)]
pub struct DeligneReport {
    pub p: u64,
    pub s: u32,
    /// max over entries of |K| / ((s+1)·p^{s/2})
    pub max_ratio: f64,
    pub pass: bool,
}

pub fn deligne_check(grid: &KGrid) -> DeligneReport {
    let bound = (grid.s as f64 + 1.0) * (grid.p as f64).powf(grid.s as f64 / 2.0);
    let max_ratio = grid
        .values
        .iter()
        .map(|v| v.norm() / bound)
        .fold(0.0f64, f64::max);
    DeligneReport {
        p: grid.p,
        s: grid.s,
        max_ratio,
        pass: max_ratio <= 1.0 + 1e-9,
    }
}

/// Empirical vs. predicted 2ℓ-th moment of the classical (s = 1, principal)
/// Kloosterman sum. The angles θ(m) of K(m,1,χ₀;p) = −2√p·cos θ(m) follow
/// the Sato-Tate measure, whose 2ℓ-th cosine moment is the Catalan number
/// C(ℓ)/4^ℓ; so the predicted moment is p^ℓ·C(ℓ).
#[derive(Debug, Clone, Copy)]
pub struct SatoTateMoment {
    pub ell: u32,
    pub empirical: f64,
    pub predicted: f64,
}

pub fn catalan(ell: u32) -> u64 {
    // binom(2l, l) / (l + 1)
    let l = ell as u64;
    let mut binom = 1u64;
    for i in 0..l {
        binom = binom * (2 * l - i) / (i + 1);
    }
    binom / (l + 1)
}

pub fn sato_tate_moment(
    ctx: &PrimeContext,
    table: &GaussTable,
    ell: u32,
) -> Result<SatoTateMoment> {
    if ell == 0 || ell > 6 {
        return Err(Error::Unsupported(format!(
            "moment order l = {ell} out of range 1..=6"
        )));
    }
    let p = ctx.p();
    let chi0 = Character::principal(p);
    let mut acc = ComplexSum::new();
    for m in 1..p {
        let q = KParams { m, s: 1, chi: chi0 };
        let v = k_spectral(ctx, table, &q)?;
        acc.add(Complex64::new(v.norm_sqr().powi(ell as i32), 0.0));
    }
    let empirical = acc.value().re / (p - 1) as f64;
    let predicted = (p as f64).powi(ell as i32) * catalan(ell) as f64;
    Ok(SatoTateMoment {
        ell,
        empirical,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::build_context;
    use crate::expsums::{gauss_table, TableMethod};

    #[test]
    fn naive_matches_hand_computed_values() {
        let ctx = build_context(5).unwrap();
        // s=1, chi_0, m=1: x + x_bar takes values 2,0,0,3 over x=1..4
        let q = KParams {
            m: 1,
            s: 1,
            chi: ctx.character(0),
        };
        let v = k_naive(&ctx, &q).unwrap();
        let expected = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
        assert!((v - expected).norm() < 1e-12);
        assert!((v.re - 0.3819660).abs() < 1e-6);

        // m=0, s=2, chi_0: (sum_x e(x/5))^2 = 1
        let q0 = KParams {
            m: 0,
            s: 2,
            chi: ctx.character(0),
        };
        let v0 = k_naive(&ctx, &q0).unwrap();
        assert!((v0 - 1.0).norm() < 1e-12);
    }

    #[test]
    fn spectral_matches_naive_exhaustively_small() {
        for p in [5u64, 7, 11, 13] {
            let ctx = build_context(p).unwrap();
            let table = gauss_table(&ctx, TableMethod::Direct);
            for s in 1..=3u32 {
                for m in 1..p {
                    for k in 0..p - 1 {
                        let q = KParams {
                            m,
                            s,
                            chi: ctx.character(k),
                        };
                        let naive = k_naive(&ctx, &q).unwrap();
                        let spectral = k_spectral(&ctx, &table, &q).unwrap();
                        let scale = naive.norm().max(1.0);
                        assert!(
                            (naive - spectral).norm() / scale < 1e-8,
                            "p={p} s={s} m={m} k={k}: {naive} vs {spectral}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn spectral_rejects_m_zero() {
        let ctx = build_context(5).unwrap();
        let table = gauss_table(&ctx, TableMethod::Direct);
        let q = KParams {
            m: 0,
            s: 2,
            chi: ctx.character(0),
        };
        assert!(matches!(k_spectral(&ctx, &table, &q), Err(Error::ZeroM)));
    }

    #[test]
    fn k_zero_closed_form_matches_naive() {
        let ctx = build_context(7).unwrap();
        let table = gauss_table(&ctx, TableMethod::Direct);
        for s in 1..=3u32 {
            for k in 0..6 {
                let q = KParams {
                    m: 0,
                    s,
                    chi: ctx.character(k),
                };
                let naive = k_naive(&ctx, &q).unwrap();
                let closed = k_zero(&table, s, ctx.character(k));
                assert!((naive - closed).norm() < 1e-9);
                // |K(0,s,chi)|^2 = p^s off the principal character, 1 on it
                let expected = if k == 0 { 1.0 } else { (7.0f64).powi(s as i32) };
                assert!((closed.norm_sqr() - expected).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn naive_guard_trips() {
        let ctx = build_context(101).unwrap();
        let q = KParams {
            m: 1,
            s: 9,
            chi: ctx.character(0),
        };
        assert!(matches!(k_naive(&ctx, &q), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn grid_fourth_power_total_at_p5() {
        // independent cross-check of the grid: sum over entries of |K|^4
        let ctx = build_context(5).unwrap();
        let table = gauss_table(&ctx, TableMethod::Direct);
        let grid = k_grid(&ctx, &table, 1);
        assert_eq!(grid.values().len(), 16);
        let total: f64 = grid.values().iter().map(|v| v.norm_sqr().powi(2)).sum();
        assert!((total - 484.0).abs() < 1e-8);
        let report = deligne_check(&grid);
        assert!(report.pass, "max ratio {}", report.max_ratio);
    }

    #[test]
    fn second_moment_row_totals_are_chi_independent() {
        for (p, s) in [(5u64, 1u32), (5, 2), (7, 1), (7, 2)] {
            let ctx = build_context(p).unwrap();
            let table = gauss_table(&ctx, TableMethod::Direct);
            let grid = k_grid(&ctx, &table, s);
            // Gamma = sum_{m=0}^{p-1} |K|^2 should match p^{s+1} - (p^s + ... + p)
            let gamma_expected: f64 = (p as f64).powi(s as i32 + 1)
                - (1..=s).map(|j| (p as f64).powi(j as i32)).sum::<f64>();
            for k in 0..p - 1 {
                let m0 = k_zero(&table, s, ctx.character(k)).norm_sqr();
                let rest: f64 = (1..p).map(|m| grid.entry(m, k).norm_sqr()).sum();
                assert!(
                    (m0 + rest - gamma_expected).abs() < 1e-6 * gamma_expected,
                    "p={p} s={s} k={k}"
                );
            }
        }
    }

    #[test]
    fn catalan_numbers() {
        assert_eq!(
            (0..=6).map(catalan).collect::<Vec<_>>(),
            vec![1, 1, 2, 5, 14, 42, 132]
        );
    }

    #[test]
    fn sato_tate_first_moment_identity() {
        // exact identity: (1/(p-1)) sum_m |K(m,1,chi_0)|^2 = (p^2-p-1)/(p-1),
        // checked against the enumerated sums as well
        for p in [5u64, 7, 11] {
            let ctx = build_context(p).unwrap();
            let table = gauss_table(&ctx, TableMethod::Direct);
            let st = sato_tate_moment(&ctx, &table, 1).unwrap();
            let exact = ((p * p - p - 1) as f64) / ((p - 1) as f64);
            assert!((st.empirical - exact).abs() < 1e-9, "p={p}");
            assert_eq!(st.predicted, (p * catalan(1)) as f64);

            let brute: f64 = (1..p)
                .map(|m| {
                    let q = KParams {
                        m,
                        s: 1,
                        chi: ctx.character(0),
                    };
                    k_naive(&ctx, &q).unwrap().norm_sqr()
                })
                .sum::<f64>()
                / (p - 1) as f64;
            assert!((brute - exact).abs() < 1e-9, "p={p}");
        }
    }
}
