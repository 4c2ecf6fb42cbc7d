//! Log-domain arithmetic.

use alloc::vec::Vec;

/// `log(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + libm::log1p(libm::exp(b - a))
    } else {
        b + libm::log1p(libm::exp(a - b))
    }
}

/// `log(sum_i e^{x_i})` with running-max subtraction, accumulated in slice order.
#[inline]
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    for &x in xs {
        sum += libm::exp(x - max);
    }
    max + libm::log(sum)
}

/// Same quantity as [`log_sum_exp`], reduced as a balanced binary tree of
/// [`log_add_exp`] calls.
pub fn log_sum_exp_pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NEG_INFINITY,
        1 => xs[0],
        len => {
            let (lo, hi) = xs.split_at(len / 2);
            log_add_exp(log_sum_exp_pairwise(lo), log_sum_exp_pairwise(hi))
        }
    }
}

/// Log-sum-exp with compensated (Neumaier) summation of the rescaled terms.
pub fn log_sum_exp_compensated(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let term = libm::exp(x - max);
        let t = sum + term;
        if libm::fabs(sum) >= libm::fabs(term) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    max + libm::log(sum + comp)
}

/// Mean and unbiased sample standard deviation by Welford's recurrence, in
/// slice order. Constant input gives a standard deviation of exactly zero.
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    (mean, libm::sqrt(m2 / (xs.len() - 1) as f64))
}

/// Evenly spaced grid of `count` points on `[start, stop]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| start + step * i as f64).collect()
        }
    }
}
