//! Closed-form statistics: the centered transformed rank sum U1 and its
//! exchangeable-null variance, the global sensitivity bound, the signed-rank
//! statistic W1, sampling-without-replacement moments, and the noise-to-
//! spread diagnostic.

use crate::error::{Error, Result};
use crate::math;
use crate::ranks::{RankedSample, SignedRankSample};
use crate::transforms::{self, TransformSpec};

/// The transformed rank sum over group 1 together with its null expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    /// sum of psi(r_i) over group-1 observations
    pub raw_sum: f64,
    /// (n1/n) * sum_{i=1}^{n-Q} psi(i)
    pub mu1: f64,
    /// raw_sum - mu1
    pub u1: f64,
}

/// Upper bound on the global sensitivity of U1, with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityBound {
    pub gs_star: f64,
    /// psi(n - Q)
    pub psi_top: f64,
    /// psi(n - Q - 1)
    pub psi_second: f64,
    /// psi-bar_Q
    pub psi_bar: f64,
}

/// U1 = sum_{group 1} psi(r_i) - (n1/n) sum_{i=1}^{n-Q} psi(i).
pub fn u1_statistic(sample: &RankedSample, psi: &TransformSpec) -> StatisticValue {
    let raw_sum = math::compensated_sum(
        sample
            .ranks
            .iter()
            .zip(&sample.group_flags)
            .filter(|(_, &flag)| flag)
            .map(|(&r, _)| psi.apply(r)),
    );
    let mu1 =
        sample.n1 as f64 / sample.n as f64 * transforms::sum_psi(psi, sample.n - sample.q_count);
    StatisticValue {
        raw_sum,
        mu1,
        u1: raw_sum - mu1,
    }
}

/// Exchangeable-null variance of U1.
///
/// sigma^2 = (n1/n)(1 - n1/n) sum psi^2(i)
///         + 2 (n1/n)((n1-1)/(n-1) - n1/n) sum_{i<j} psi(i)psi(j),
///
/// with both sums over i = 1..=n-Q. The cross term is ((sum psi)^2 -
/// sum psi^2)/2, keeping the evaluation O(n). Group sizes are real-valued so
/// the privately estimated (possibly half-integer) sizes can be plugged in.
pub fn null_variance(n1: f64, n2: f64, psi: &TransformSpec, q_count: usize) -> f64 {
    let n = n1 + n2;
    debug_assert!(n >= 2.0 && n1 >= 0.0 && n2 >= 0.0);
    let total = libm::round(n) as usize;
    debug_assert!((n - total as f64).abs() < 1e-6, "n must be integral");
    if q_count >= total {
        return 0.0;
    }
    let m = total - q_count;
    let s1 = transforms::sum_psi(psi, m);
    let s2 = transforms::sum_psi_sq(psi, m);
    let cross = 0.5 * (s1 * s1 - s2);
    let a = n1 / n;
    a * (1.0 - a) * s2 + 2.0 * a * ((n1 - 1.0) / (n - 1.0) - a) * cross
}

/// GS*(U1) = max{psi(n-Q), psi(n-Q) + psi(n-Q-1) - psi-bar_Q}.
pub fn sensitivity_bound(psi: &TransformSpec, n: usize, q_count: usize) -> Result<SensitivityBound> {
    if n < q_count || n - q_count < 2 {
        return Err(Error::QTooLarge { q_count, n });
    }
    let m = n - q_count;
    let psi_top = psi.apply(m);
    let psi_second = psi.apply(m - 1);
    let psi_bar = transforms::psi_bar_q(psi, n, q_count);
    let gs_star = psi_top.max(psi_top + psi_second - psi_bar);
    Ok(SensitivityBound {
        gs_star,
        psi_top,
        psi_second,
        psi_bar,
    })
}

/// W1 = sum s_i psi((r_i - Q) v 0).
pub fn w1_statistic(sample: &SignedRankSample, psi: &TransformSpec) -> f64 {
    math::compensated_sum(
        sample
            .modified_ranks
            .iter()
            .zip(&sample.signs)
            .map(|(&m, &s)| s as f64 * psi.apply(m)),
    )
}

/// Global sensitivity bound of W1: 2 psi(n - Q).
pub fn w1_sensitivity(psi: &TransformSpec, n: usize, q_count: usize) -> f64 {
    debug_assert!(q_count <= n);
    2.0 * psi.apply(n - q_count)
}

/// Null variance of W1 under independent fair signs: sum_{i=1}^{n-Q} psi^2(i).
pub fn w1_null_variance(psi: &TransformSpec, n: usize, q_count: usize) -> f64 {
    debug_assert!(q_count <= n);
    transforms::sum_psi_sq(psi, n - q_count)
}

/// Mean and variance of the sum of k values drawn from `values` by simple
/// random sampling without replacement.
pub fn srswor_moments(values: &[f64], k: usize) -> (f64, f64) {
    let n = values.len();
    debug_assert!(k <= n);
    let kf = k as f64;
    let nf = n as f64;
    let s1 = math::compensated_sum(values.iter().copied());
    let s2 = math::compensated_sum(values.iter().map(|v| v * v));
    let cross = 0.5 * (s1 * s1 - s2);
    let mean = kf / nf * s1;
    if n < 2 {
        return (mean, 0.0);
    }
    let variance =
        kf / nf * s2 + 2.0 * (kf * (kf - 1.0)) / (nf * (nf - 1.0)) * cross - mean * mean;
    (mean, variance)
}

/// Noise-to-spread diagnostic GS*(U1) / (sigma(n1,n2,psi,Q) * eps_U).
pub fn pi_n_diagnostic(
    psi: &TransformSpec,
    n1: usize,
    n2: usize,
    q_count: usize,
    eps_u: f64,
) -> Result<f64> {
    if !(eps_u > 0.0) {
        return Err(Error::InvalidParameter("eps_u must be > 0"));
    }
    let bound = sensitivity_bound(psi, n1 + n2, q_count)?;
    let var = null_variance(n1 as f64, n2 as f64, psi, q_count);
    if var <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok(bound.gs_star / (math::sqrt(var) * eps_u))
}
