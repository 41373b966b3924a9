//! Compensated complex summation with a tracked rounding-error bound.
//!
//! Moment aggregates in this crate reach magnitudes around p^(2s+2), and the
//! exact-integer cross-checks round float totals to integers, so plain
//! accumulation is not good enough. `ComplexSum` runs Neumaier's variant of
//! Kahan summation independently on the real and imaginary parts and keeps a
//! running bound on the absolute rounding error of the reported value.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    sum: Complex64,
    comp: Complex64,
    bound: f64,
}

#[inline]
fn neumaier_step(sum: &mut f64, comp: &mut f64, value: f64) {
    let t = *sum + value;
    if sum.abs() >= value.abs() {
        *comp += (*sum - t) + value;
    } else {
        *comp += (value - t) + *sum;
    }
    *sum = t;
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        neumaier_step(&mut self.sum.re, &mut self.comp.re, value.re);
        neumaier_step(&mut self.sum.im, &mut self.comp.im, value.im);
        // One rounding per component per step, each at most eps/2 * |partial|;
        // the compensation recovers it to first order, so this overstates the
        // residual error by a wide margin.
        self.bound +=
            f64::EPSILON * (self.sum.re.abs() + self.sum.im.abs() + value.re.abs() + value.im.abs());
    }

    /// Current compensated total.
    #[inline]
    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }

    /// Upper bound on the absolute rounding error of `value()`.
    pub fn error_bound(&self) -> f64 {
        self.bound
    }

    pub fn sum_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}
