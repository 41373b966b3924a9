//! Exact-size discrete Fourier transform via Bluestein's chirp-z algorithm.
//!
//! The batch Gauss-sum builder needs a length-(p−1) transform, and p−1 is
//! never a power of two. Bluestein rewrites ak = (a² + k² − (k−a)²)/2 so the
//! length-n DFT becomes one complex convolution, which a zero-padded
//! power-of-two FFT evaluates in O(n log n).

use num_complex::Complex64;

/// In-place radix-2 FFT. `sign` is +1.0 for exp(+2πi·jk/L), −1.0 for the
/// opposite convention. `buf.len()` must be a power of two.
fn fft_pow2(buf: &mut [Complex64], sign: f64) {
    let l = buf.len();
    debug_assert!(l.is_power_of_two());

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..l {
        let mut bit = l >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    let tau = std::f64::consts::TAU;
    let mut len = 2usize;
    while len <= l {
        let ang = sign * tau / len as f64;
        let (s, c) = ang.sin_cos();
        let wlen = Complex64::new(c, s);
        let mut start = 0usize;
        while start < l {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wlen;
            }
            start += len;
        }
        len <<= 1;
    }
}

/// Length-n DFT with the positive-exponent convention:
/// X[k] = Σ_{a=0}^{n−1} x[a]·exp(+2πi·ak/n).
pub fn dft_bluestein(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    assert!(n >= 1);
    if n == 1 {
        return vec![input[0]];
    }
    let l = (2 * n - 1).next_power_of_two();

    // chirp c[t] = exp(+πi·t²/n); t² is reduced mod 2n exactly in integers
    // before touching floats, since exp(πi·u/n) has period 2n in u.
    let two_n = 2 * n as u64;
    let chirp: Vec<Complex64> = (0..n as u64)
        .map(|t| {
            let u = t * t % two_n;
            let (s, c) = (std::f64::consts::PI * u as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();

    // X[k] = c[k] · Σ_a (x[a]·c[a]) · conj(c[k−a]); the kernel is symmetric
    // in ±j so it wraps onto a circular convolution of length L.
    let mut u = vec![Complex64::new(0.0, 0.0); l];
    for a in 0..n {
        u[a] = input[a] * chirp[a];
    }
    let mut v = vec![Complex64::new(0.0, 0.0); l];
    for j in 0..n {
        v[j] = chirp[j].conj();
        if j > 0 {
            v[l - j] = chirp[j].conj();
        }
    }

    fft_pow2(&mut u, -1.0);
    fft_pow2(&mut v, -1.0);
    for (a, b) in u.iter_mut().zip(v.iter()) {
        *a *= b;
    }
    fft_pow2(&mut u, 1.0);

    let scale = 1.0 / l as f64;
    (0..n).map(|k| u[k] * chirp[k] * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: the defining O(n²) double loop.
    fn dft_naive(input: &[Complex64]) -> Vec<Complex64> {
        let n = input.len();
        let tau = std::f64::consts::TAU;
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, x) in input.iter().enumerate() {
                    let ang = tau * (a * k % n) as f64 / n as f64;
                    let (s, c) = ang.sin_cos();
                    acc += x * Complex64::new(c, s);
                }
                acc
            })
            .collect()
    }

    fn pseudo_random_signal(n: usize, seed: u64) -> Vec<Complex64> {
        // xorshift; no need for a real RNG here
        let mut state = seed | 1;
        (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let re = (state % 2000) as f64 / 1000.0 - 1.0;
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let im = (state % 2000) as f64 / 1000.0 - 1.0;
                Complex64::new(re, im)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_on_awkward_lengths() {
        for (n, seed) in [(1, 7), (2, 11), (4, 13), (6, 17), (10, 19), (30, 23), (96, 29), (100, 31), (126, 37)] {
            let x = pseudo_random_signal(n, seed);
            let fast = dft_bluestein(&x);
            let slow = dft_naive(&x);
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!((a - b).norm() < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let mut x = vec![Complex64::new(0.0, 0.0); 12];
        x[0] = Complex64::new(1.0, 0.0);
        for v in dft_bluestein(&x) {
            assert!((v - 1.0).norm() < 1e-12);
        }
    }
}
