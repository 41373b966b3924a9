//! The invariant suite: every identity the crate relies on, re-checked
//! against its independent route at configurable (p, s) bounds, plus the
//! stated-vs-oracle adjudication that produces the errata report.
//!
//! Adjudication compares every closed form as commonly stated against the
//! enumeration oracle (or the rounded spectral sums, where the oracle is a
//! grid). Exactly two discrepancies are expected:
//!
//! * the principal-character second moment is stated as Γ(p,s) but the
//!   enumeration gives Γ(p,s) − 1;
//! * the count of product-1 tuples containing a unit coordinate is stated
//!   one short of the enumeration (the all-ones tuple).
//!
//! Findings are warnings, not failures: the corrected pipeline is the
//! supported one, and the suite exists to document the difference.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::context::{build_context, char_orthogonality_check, primes_in};
use crate::counts::{self, Family, CLOSED_FORM_FAMILIES};
use crate::expsums::{gauss_table, jacobi_sum, mixed_moment_sigma, JacobiMethod, TableMethod};
use crate::hyperk::{deligne_check, k_grid, k_naive, k_spectral, k_zero, sato_tate_moment, KParams};
use crate::moments::{
    closed_form_reference, fourth_moment_direct, fourth_moment_exact, second_moment_closed,
    second_moment_direct, second_moment_stated_principal, ClosedFormReference,
};
use crate::Result;

/// Bounds for the suite. Defaults keep the exhaustive parts at a few seconds.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub p_max: u64,
    pub s_max: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { p_max: 13, s_max: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// One (p,s) instance where a stated form disagrees with the oracle.
#[derive(Debug, Clone)]
pub struct Witness {
    pub p: u64,
    pub s: u32,
    pub stated: BigInt,
    pub oracle: BigInt,
}

#[derive(Debug, Clone)]
pub struct Finding {
    pub formula: String,
    pub description: String,
    pub witnesses: Vec<Witness>,
}

/// Machine-readable list of every stated-vs-oracle discrepancy found.
#[derive(Debug, Clone, Default)]
pub struct ErrataReport {
    pub findings: Vec<Finding>,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub checks: Vec<CheckResult>,
    pub errata: ErrataReport,
}

impl VerifyOutcome {
    /// Errata findings are expected and excluded from pass/fail.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(checks: &mut Vec<CheckResult>, name: &str, pass: bool, detail: String) {
    checks.push(CheckResult {
        name: name.to_string(),
        pass,
        detail,
    });
}

/// Run the full suite at the configured bounds.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyOutcome> {
    let mut checks = Vec::new();
    let primes = primes_in(5, cfg.p_max);
    let s_max = cfg.s_max.max(1);

    // --- context layer -----------------------------------------------------
    {
        let mut ok = true;
        let mut detail = String::new();
        for &p in &primes {
            let ctx = build_context(p)?;
            if !char_orthogonality_check(&ctx) {
                ok = false;
                detail = format!("orthogonality fails at p={p}");
                break;
            }
        }
        check(&mut checks, "context.char_orthogonality", ok, detail);
    }

    // --- Gauss sums ---------------------------------------------------------
    {
        let mut worst = 0.0f64;
        for &p in &primes {
            let ctx = build_context(p)?;
            let table = gauss_table(&ctx, TableMethod::Direct);
            let fast = gauss_table(&ctx, TableMethod::Fast);
            for chi in ctx.characters() {
                let g = table.get(chi.index());
                worst = worst.max((g - fast.get(chi.index())).norm());
                if !chi.is_principal() {
                    worst = worst.max((g.norm_sqr() - p as f64).abs() / p as f64);
                    let gc = table.get(chi.conjugate().index());
                    let expect = p as f64 * chi.sign_at_minus_one();
                    worst = worst.max((g * gc - expect).norm() / p as f64);
                }
            }
        }
        check(
            &mut checks,
            "expsums.gauss_identities",
            worst < 1e-8,
            format!("worst deviation {worst:.3e}"),
        );
    }

    // --- Jacobi sums ----------------------------------------------------------
    {
        let mut worst = 0.0f64;
        for &p in &primes {
            let ctx = build_context(p)?;
            for chi in ctx.characters() {
                for psi in ctx.characters() {
                    let d = jacobi_sum(&ctx, chi, psi, JacobiMethod::Direct);
                    let g = jacobi_sum(&ctx, chi, psi, JacobiMethod::Gauss);
                    worst = worst.max((d - g).norm());
                }
            }
        }
        check(
            &mut checks,
            "expsums.jacobi_methods",
            worst < 1e-9,
            format!("worst |direct - gauss| = {worst:.3e}"),
        );
    }

    // --- mixed moment of Gauss sums ------------------------------------------
    if let Some(&p) = primes.last() {
        let ctx = build_context(p)?;
        let table = gauss_table(&ctx, TableMethod::Direct);
        let m1 = mixed_moment_sigma(&ctx, &table, 1);
        let m2 = mixed_moment_sigma(&ctx, &table, 2);
        let imag_mass = m2.value.im.abs() * m2.admissible_triples as f64;
        let ok = m1.value.norm() <= 1.0 + 1e-12
            && m2.value.norm() <= 1.0 + 1e-12
            && imag_mass < 1e-6 * m2.admissible_triples as f64;
        check(
            &mut checks,
            "expsums.mixed_moment_average",
            ok,
            format!(
                "p={p}: |sigma(1)|={:.4}, |sigma(2)|={:.4}",
                m1.value.norm(),
                m2.value.norm()
            ),
        );
    }

    // --- spectral vs naive ----------------------------------------------------
    {
        let mut worst = 0.0f64;
        for &p in primes.iter().filter(|&&p| p <= 13) {
            let ctx = build_context(p)?;
            let table = gauss_table(&ctx, TableMethod::Direct);
            for s in 1..=s_max.min(3) {
                for m in 1..p {
                    for chi in ctx.characters() {
                        let q = KParams { m, s, chi };
                        let naive = k_naive(&ctx, &q)?;
                        let spectral = k_spectral(&ctx, &table, &q)?;
                        worst = worst.max((naive - spectral).norm() / naive.norm().max(1.0));
                    }
                }
            }
        }
        check(
            &mut checks,
            "hyperk.spectral_vs_naive",
            worst < 1e-8,
            format!("worst relative deviation {worst:.3e}"),
        );
    }

    // --- grids: bound, chi-independent totals, Sato-Tate identity -------------
    {
        let mut max_ratio = 0.0f64;
        let mut gamma_spread = 0.0f64;
        for &p in &primes {
            let ctx = build_context(p)?;
            let table = gauss_table(&ctx, TableMethod::Direct);
            for s in 1..=s_max.min(3) {
                let grid = k_grid(&ctx, &table, s);
                max_ratio = max_ratio.max(deligne_check(&grid).max_ratio);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for chi in ctx.characters() {
                    let total = k_zero(&table, s, chi).norm_sqr()
                        + (1..p).map(|m| grid.entry(m, chi.index()).norm_sqr()).sum::<f64>();
                    lo = lo.min(total);
                    hi = hi.max(total);
                }
                gamma_spread = gamma_spread.max((hi - lo) / hi);
            }
        }
        check(
            &mut checks,
            "hyperk.deligne_bound",
            max_ratio <= 1.0 + 1e-9,
            format!("max |K|/((s+1)p^(s/2)) = {max_ratio:.12}"),
        );
        check(
            &mut checks,
            "hyperk.gamma_chi_independent",
            gamma_spread < 1e-6,
            format!("relative spread {gamma_spread:.3e}"),
        );
    }

    if let Some(&p) = primes.last() {
        let ctx = build_context(p)?;
        let table = gauss_table(&ctx, TableMethod::Direct);
        let st = sato_tate_moment(&ctx, &table, 1)?;
        let exact = ((p * p - p - 1) as f64) / ((p - 1) as f64);
        check(
            &mut checks,
            "hyperk.sato_tate_first_moment",
            (st.empirical - exact).abs() < 1e-8,
            format!("p={p}: {:.9} vs {:.9}", st.empirical, exact),
        );
    }

    // --- counts ---------------------------------------------------------------
    {
        let mut ok = true;
        let mut detail = String::new();
        'outer: for &p in &primes {
            for s in 1..=s_max {
                for family in CLOSED_FORM_FAMILIES {
                    let us: Vec<Option<u64>> = match family {
                        Family::Au => (2..p).map(Some).collect(),
                        Family::N => (0..p).map(Some).collect(),
                        _ => vec![None],
                    };
                    for u in us {
                        let closed = counts::count_closed(family, p, s, u)?;
                        let brute = match counts::count_brute(family, p, s, u) {
                            Ok(v) => v,
                            Err(crate::Error::TooLarge { .. }) => continue,
                            Err(e) => return Err(e),
                        };
                        if closed != brute {
                            ok = false;
                            detail =
                                format!("{family} at (p,s,u)=({p},{s},{u:?}): {closed} vs {brute}");
                            break 'outer;
                        }
                    }
                }
            }
        }
        check(&mut checks, "counts.closed_vs_brute", ok, detail);
    }

    {
        let mut ok = true;
        let mut detail = String::new();
        for &p in &primes {
            let report = counts::verify_recurrence(p, s_max + 2)?;
            if !report.pass() {
                ok = false;
                detail = report.violations.join("; ");
            }
        }
        check(&mut checks, "counts.product_recurrence", ok, detail);
    }

    {
        let mut ok = true;
        let mut detail = String::new();
        for &p in &primes {
            for s in 1..=s_max {
                match (
            counts::count_c1(p, s),
                    counts::count_brute(Family::C1, p, s, None),
                ) {
                    (Ok(assembled), Ok(brute)) => {
                        if assembled != brute {
                            ok = false;
                            detail = format!("(p,s)=({p},{s}): {assembled} vs {brute}");
                        }
                    }
                    (_, Err(crate::Error::TooLarge { .. })) => continue,
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
        }
        check(&mut checks, "counts.c1_assembly_vs_brute", ok, detail);
    }

    // --- moments ----------------------------------------------------------------
    {
        let mut worst = 0.0f64;
        for &p in primes.iter().filter(|&&p| p <= 31) {
            let ctx = build_context(p)?;
            let table = gauss_table(&ctx, TableMethod::Direct);
            for s in 1..=s_max.min(3) {
                for chi in ctx.characters() {
                    let direct = second_moment_direct(&ctx, &table, s, chi)?;
                    let closed = second_moment_closed(p, s, chi.is_principal())
                        .value
                        .to_f64()
                        .unwrap();
                    worst = worst.max((direct - closed).abs());
                }
            }
        }
        check(
            &mut checks,
            "moments.second_closed_vs_direct",
            worst < 1e-3,
            format!("worst residual {worst:.3e}"),
        );
    }

    {
        let mut worst = 0.0f64;
        for &p in primes.iter().filter(|&&p| p <= 13) {
            let ctx = build_context(p)?;
            let table = gauss_table(&ctx, TableMethod::Direct);
            for s in 1..=s_max.min(3) {
                let direct = fourth_moment_direct(&ctx, &table, s)?;
                let exact = fourth_moment_exact(p, s)?.to_f64().unwrap();
                worst = worst.max(((direct - exact) / exact).abs());
            }
        }
        check(
            &mut checks,
            "moments.fourth_exact_vs_direct",
            worst < 1e-9,
            format!("worst relative deviation {worst:.3e}"),
        );
    }

    {
        let mut ok = true;
        let mut detail = String::new();
        for &p in &primes {
            for s in [1u32, 2] {
                if let ClosedFormReference::Exact(reference) = closed_form_reference(p, s)? {
                    let exact = fourth_moment_exact(p, s)?;
                    if exact != reference {
                        ok = false;
                        detail = format!("(p,s)=({p},{s}): {exact} vs reference {reference}");
                    }
                }
            }
        }
        check(&mut checks, "moments.fourth_vs_reference_polynomials", ok, detail);
    }

    // --- errata adjudication ------------------------------------------------
    let errata = adjudicate(&primes, s_max)?;

    Ok(VerifyOutcome { checks, errata })
}

/// Compare every stated closed form against the oracle and collect the
/// mismatches. Runs the count families against the enumeration and both
/// second-moment cases against the rounded spectral sums.
fn adjudicate(primes: &[u64], s_max: u32) -> Result<ErrataReport> {
    let mut findings = Vec::new();

    for family in CLOSED_FORM_FAMILIES {
        let mut witnesses = Vec::new();
        for &p in primes {
            for s in 1..=s_max {
                let us: Vec<Option<u64>> = match family {
                    Family::Au => vec![Some(2)],
                    Family::N => vec![Some(0), Some(1), Some(p - 1)],
                    _ => vec![None],
                };
                for u in us {
                    let stated = counts::count_closed_stated(family, p, s, u)?;
                    let oracle = match counts::count_brute(family, p, s, u) {
                        Ok(v) => v,
                        Err(crate::Error::TooLarge { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    if stated != oracle {
                        witnesses.push(Witness {
                            p,
                            s,
                            stated,
                            oracle,
                        });
                    }
                }
            }
        }
        if !witnesses.is_empty() {
            findings.push(Finding {
                formula: format!("count_{family}_closed"),
                description:
                    "stated closed form omits the all-ones tuple; the corrected form adds 1"
                        .to_string(),
                witnesses,
            });
        }
    }

    // second moment, both character classes, against the rounded grid sums
    for principal in [false, true] {
        let mut witnesses = Vec::new();
        for &p in primes.iter().filter(|&&p| p <= 31) {
            let ctx = build_context(p)?;
            let table = gauss_table(&ctx, TableMethod::Direct);
            for s in 1..=s_max.min(3) {
                let chi = if principal {
                    ctx.character(0)
                } else {
                    ctx.character(1)
                };
                let direct = second_moment_direct(&ctx, &table, s, chi)?;
                let oracle = BigInt::from(direct.round() as i64);
                let stated = if principal {
                    second_moment_stated_principal(p, s)
                } else {
                    second_moment_closed(p, s, false).value
                };
                if stated != oracle {
                    witnesses.push(Witness {
                        p,
                        s,
                        stated,
                        oracle,
                    });
                }
            }
        }
        if !witnesses.is_empty() {
            findings.push(Finding {
                formula: if principal {
                    "second_moment_principal".to_string()
                } else {
                    "second_moment_nonprincipal".to_string()
                },
                description:
                    "stated second moment misses the -1 from the m=0 term of the principal character"
                        .to_string(),
                witnesses,
            });
        }
    }

    Ok(ErrataReport { findings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes_with_two_findings() {
        let outcome = run_verify(&VerifyConfig { p_max: 7, s_max: 3 }).unwrap();
        for c in &outcome.checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        assert!(outcome.pass());
        assert_eq!(outcome.errata.findings.len(), 2);
        let names: Vec<&str> = outcome
            .errata
            .findings
            .iter()
            .map(|f| f.formula.as_str())
            .collect();
        assert!(names.contains(&"count_B_closed"));
        assert!(names.contains(&"second_moment_principal"));
        for finding in &outcome.errata.findings {
            assert!(finding
                .witnesses
                .iter()
                .any(|w| w.p == 5 && (w.s == 1 || w.s == 2)));
        }
    }
}
