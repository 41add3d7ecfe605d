//! Length-n vector kernels and operation counters.
//!
//! Every solver in the crate goes through these helpers so the counts in
//! [`OpCounters`] reflect the work actually done: one `dot` is one inner
//! product, one `axpy` is one vector update.

use std::ops::{Add, AddAssign};

/// Work performed by a solve, in units of length-n vector operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub inner_products: usize,
    pub vector_updates: usize,
    pub shift_solves: usize,
}

impl Add for OpCounters {
    type Output = OpCounters;

    fn add(self, rhs: OpCounters) -> OpCounters {
        OpCounters {
            inner_products: self.inner_products + rhs.inner_products,
            vector_updates: self.vector_updates + rhs.vector_updates,
            shift_solves: self.shift_solves + rhs.shift_solves,
        }
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: OpCounters) {
        *self = *self + rhs;
    }
}

/// Four-way accumulated dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        acc[0] += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// `‖a − b‖₂ / ‖b‖₂`, or the absolute difference when `b = 0`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den = norm2(b);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Dot product that records itself in `c`.
#[inline]
pub(crate) fn cdot(c: &mut OpCounters, a: &[f64], b: &[f64]) -> f64 {
    c.inner_products += 1;
    dot(a, b)
}

#[inline]
pub(crate) fn caxpy(c: &mut OpCounters, alpha: f64, x: &[f64], y: &mut [f64]) {
    c.vector_updates += 1;
    axpy(alpha, x, y);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_handles_remainders() {
        for n in 0..11 {
            let a: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
            let expected: f64 = a.iter().map(|x| x * x).sum();
            assert_eq!(dot(&a, &a), expected);
        }
    }

    #[test]
    fn counters_accumulate() {
        let mut c = OpCounters::default();
        let mut y = vec![1.0, 2.0];
        cdot(&mut c, &y.clone(), &[1.0, 1.0]);
        caxpy(&mut c, 2.0, &[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 4.0]);
        assert_eq!(c.inner_products, 1);
        assert_eq!(c.vector_updates, 1);
        let total = c + c;
        assert_eq!(total.inner_products, 2);
    }

    #[test]
    fn rel_diff_zero_reference() {
        assert_eq!(rel_diff(&[3.0, 4.0], &[0.0, 0.0]), 5.0);
        assert_eq!(rel_diff(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
    }
}
