//! Property tests for the structural invariants: randomized (p, s, u, m, χ)
//! draws against exact identities, plus worker-count determinism.

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;

use kloosterman::compsum::ComplexSum;
use kloosterman::context::build_context;
use kloosterman::counts::{self, Family};
use kloosterman::expsums::{gauss_sum, gauss_table, jacobi_sum, JacobiMethod, TableMethod};
use kloosterman::hyperk::{k_grid, k_naive, k_spectral, KParams};

const SMALL_PRIMES: [u64; 8] = [5, 7, 11, 13, 17, 19, 23, 29];

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(&SMALL_PRIMES[..])
}

proptest! {
    #[test]
    fn dlog_is_a_homomorphism(p in small_prime(), x in 1u64..1000, y in 1u64..1000) {
        let ctx = build_context(p).unwrap();
        let (x, y) = (x % (p - 1) + 1, y % (p - 1) + 1);
        prop_assert_eq!(
            ctx.dlog(x * y % p),
            (ctx.dlog(x) + ctx.dlog(y)) % (p - 1)
        );
    }

    #[test]
    fn characters_are_completely_multiplicative(
        p in small_prime(),
        k in 0u64..100,
        x in 1u64..1000,
        y in 1u64..1000,
    ) {
        let ctx = build_context(p).unwrap();
        let chi = ctx.character(k % (p - 1));
        let (x, y) = (x % (p - 1) + 1, y % (p - 1) + 1);
        let lhs = ctx.char_eval(chi, x * y % p);
        let rhs = ctx.char_eval(chi, x) * ctx.char_eval(chi, y);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        let conj = ctx.char_eval(chi, ctx.inv(x));
        prop_assert!((conj - ctx.char_eval(chi, x).conj()).norm() < 1e-12);
    }

    #[test]
    fn gauss_modulus_is_sqrt_p(p in small_prime(), k in 1u64..100) {
        let ctx = build_context(p).unwrap();
        let chi = ctx.character(k % (p - 2) + 1); // any non-principal index
        let g = gauss_sum(&ctx, chi);
        prop_assert!((g.norm_sqr() - p as f64).abs() < 1e-9 * p as f64);
    }

    #[test]
    fn jacobi_routes_agree(p in small_prime(), j in 0u64..100, k in 0u64..100) {
        let ctx = build_context(p).unwrap();
        let chi = ctx.character(j % (p - 1));
        let psi = ctx.character(k % (p - 1));
        let d = jacobi_sum(&ctx, chi, psi, JacobiMethod::Direct);
        let g = jacobi_sum(&ctx, chi, psi, JacobiMethod::Gauss);
        prop_assert!((d - g).norm() < 1e-9);
    }

    #[test]
    fn spectral_equals_naive(
        p in small_prime(),
        s in 1u32..=3,
        m in 1u64..1000,
        k in 0u64..100,
    ) {
        let ctx = build_context(p).unwrap();
        let table = gauss_table(&ctx, TableMethod::Direct);
        let q = KParams { m: m % (p - 1) + 1, s, chi: ctx.character(k % (p - 1)) };
        let naive = k_naive(&ctx, &q).unwrap();
        let spectral = k_spectral(&ctx, &table, &q).unwrap();
        prop_assert!((naive - spectral).norm() <= 1e-8 * naive.norm().max(1.0));
        // the value also stays inside the (s+1) p^{s/2} bound
        let bound = (s as f64 + 1.0) * (p as f64).powf(s as f64 / 2.0);
        prop_assert!(naive.norm() <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn product_class_masses_partition(p in small_prime(), s in 1u32..=8) {
        // A(s) + (p-2)*A_u(s) = (p-2)^s: tuples over [2,p-1] split by product
        let a = counts::count_closed(Family::A, p, s, None).unwrap();
        let au = counts::count_closed(Family::Au, p, s, Some(2)).unwrap();
        prop_assert_eq!(
            a + BigInt::from(p - 2) * au,
            BigInt::from(p - 2).pow(s)
        );
    }

    #[test]
    fn shifted_class_masses_partition(p in small_prime(), s in 1u32..=6) {
        // sum_u N(u) = (p-1)^s and S(s) = sum_u N(u)^2
        let mut total = BigInt::from(0u64);
        let mut squares = BigInt::from(0u64);
        for u in 0..p {
            let n = counts::count_closed(Family::N, p, s, Some(u)).unwrap();
            total += &n;
            squares += &n * &n;
        }
        prop_assert_eq!(total, BigInt::from(p - 1).pow(s));
        prop_assert_eq!(squares, counts::count_closed(Family::S, p, s, None).unwrap());
    }

    #[test]
    fn closed_equals_brute_on_random_instances(
        p in prop::sample::select(&[5u64, 7, 11][..]),
        s in 1u32..=3,
        pick in 0usize..9,
        u in 0u64..1000,
    ) {
        let family = counts::CLOSED_FORM_FAMILIES[pick];
        let u = match family {
            Family::Au => Some(u % (p - 2) + 2),
            Family::N => Some(u % p),
            _ => None,
        };
        let closed = counts::count_closed(family, p, s, u).unwrap();
        let brute = counts::count_brute(family, p, s, u).unwrap();
        prop_assert_eq!(closed, brute);
    }

    #[test]
    fn compensated_sum_is_exact_on_integers(values in prop::collection::vec(-1000i64..1000, 1..200)) {
        let mut acc = ComplexSum::new();
        for &v in &values {
            acc.add(Complex64::new(v as f64, (-v) as f64));
        }
        let exact: i64 = values.iter().sum();
        prop_assert_eq!(acc.value().re, exact as f64);
        prop_assert_eq!(acc.value().im, -exact as f64);
        prop_assert!((acc.value().re - exact as f64).abs() <= acc.error_bound());
    }
}

#[test]
fn grid_is_identical_for_any_worker_count() {
    let run = |threads: usize| -> Vec<Complex64> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let ctx = build_context(31).unwrap();
            let table = gauss_table(&ctx, TableMethod::Direct);
            k_grid(&ctx, &table, 2).values().to_vec()
        })
    };
    let single = run(1);
    let multi = run(4);
    assert_eq!(single.len(), multi.len());
    for (a, b) in single.iter().zip(multi.iter()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}

#[test]
fn brute_counts_are_identical_for_any_worker_count() {
    let run = |threads: usize| -> BigInt {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| counts::count_brute(Family::T, 13, 4, None).unwrap())
    };
    assert_eq!(run(1), run(3));
}
