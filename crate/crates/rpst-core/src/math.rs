//! Scalar math kernel.
//!
//! All transcendentals go through `libm` so the crate builds without `std`.
//! The normal CDF is evaluated through `erfc` and its inverse through a
//! bracketed Newton iteration on `erfc`, accurate to well below 1e-12
//! relative over the range used by the tests.

pub use libm::{atan, ceil, erf, erfc, exp, fabs, floor, log, log1p, pow, sqrt};

pub const SQRT_2: f64 = core::f64::consts::SQRT_2;
const FRAC_2_SQRT_PI: f64 = core::f64::consts::FRAC_2_SQRT_PI;

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if fabs(sum) >= fabs(v) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// x^k for small integer k, by repeated multiplication.
pub fn int_pow(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Two-sided normal tail probability 2(1 - Phi(|z|)).
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(fabs(z) / SQRT_2)
}

/// Inverse error function on (-1, 1).
///
/// Solves erfc(y) = 1 - |x| by Newton's method inside a maintained bracket,
/// so convergence is guaranteed; the seed bracket is grown geometrically.
pub fn erf_inv(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !(fabs(x) < 1.0) {
        return if x >= 1.0 {
            f64::INFINITY
        } else if x <= -1.0 {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        };
    }
    let target = 1.0 - fabs(x); // erfc(y) at the solution
    let mut lo = 0.0;
    let mut hi = 1.0;
    while erfc(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 32.0 {
            break;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = erfc(y) - target;
        if f > 0.0 {
            lo = y;
        } else if f < 0.0 {
            hi = y;
        } else {
            break;
        }
        // erfc'(y) = -2/sqrt(pi) exp(-y^2)
        let step = f / (FRAC_2_SQRT_PI * exp(-y * y));
        let next = y + step;
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if next == y {
            break;
        }
        y = next;
    }
    if x < 0.0 {
        -y
    } else {
        y
    }
}
