//! End-to-end private tests and the classical non-private baseline.
//!
//! The private two-sample scale test ranks the pooled sample center-outward,
//! zeroes the Q most central ranks, transforms, sums over group 1, and adds
//! Laplace noise scaled to the global sensitivity bound. The reference
//! distribution is normal with a conservative variance: the
//! exchangeable-null variance evaluated at privately underestimated group
//! disparities, plus the variance 2*(GS*/eps_U)^2 of the injected noise.
//! The paired test works the same way on signed transformed ranks, where no
//! group sizes need to be estimated.

use rand_core::RngCore;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::privacy::{self, GroupSizeEstimate, PrivacyBudget};
use crate::ranks::{
    self, classic_siegel_tukey_ranks, Alternation, ModificationSpec, RankedSample,
};
use crate::stats;
use crate::transforms::TransformSpec;

/// Knobs that do not affect the statistic's definition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TestOptions {
    pub alternation: Alternation,
    /// Scale of the uniform tie-breaking jitter; ties are an error when unset.
    pub tie_jitter: Option<f64>,
    /// Subtract each group's median before ranking. The median is computed
    /// from the raw data, so this is NOT private; simulation use only.
    pub center_medians: bool,
}

/// Outcome of a private test.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PrivateTestResult {
    /// The privatized statistic (U1 or W1 plus Laplace noise).
    pub statistic_private: f64,
    /// Scale of the injected Laplace noise (sensitivity / eps_U).
    pub noise_scale: f64,
    /// Conservative null standard deviation of the privatized statistic.
    pub sigma_tilde: f64,
    /// |statistic_private| / sigma_tilde.
    pub z_score: f64,
    /// Two-sided p-value 2(1 - Phi(z_score)).
    pub p_value: f64,
    /// Private group-size estimate (two-sample test only).
    pub group_estimate: Option<GroupSizeEstimate>,
    pub eps_u: f64,
    pub eps_d: Option<f64>,
    pub delta: Option<f64>,
    /// Total privacy cost by basic composition.
    pub eps_total: f64,
    pub psi: TransformSpec,
    /// The proportion q, when the modification was given that way.
    pub q: Option<f64>,
    /// Number of zeroed central ranks.
    pub q_count: usize,
    pub n: usize,
}

/// Outcome of the classical Siegel-Tukey test.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ClassicTestResult {
    /// min(U1_hat - n1(n1+1)/2, U2_hat - n2(n2+1)/2).
    pub statistic: f64,
    /// Half-normal critical value at the requested level.
    pub critical_value: f64,
    pub reject: bool,
    pub alpha: f64,
    /// min(n1, n2).
    pub m: usize,
    pub n: usize,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 0 {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    } else {
        v[n / 2]
    }
}

fn centered(values: &[f64]) -> Vec<f64> {
    let m = median(values);
    values.iter().map(|v| v - m).collect()
}

fn rank_with_options<R: RngCore + ?Sized>(
    group1: &[f64],
    group2: &[f64],
    modification: &ModificationSpec,
    options: &TestOptions,
    rng: &mut R,
) -> Result<RankedSample> {
    match options.tie_jitter {
        Some(scale) => ranks::rank_data_with_jitter(
            group1,
            group2,
            modification,
            options.alternation,
            scale,
            rng,
        ),
        None => ranks::rank_data(group1, group2, modification, options.alternation),
    }
}

/// Private rank-transformed percentile-modified Siegel-Tukey scale test.
pub fn rpst_test<R: RngCore + ?Sized>(
    group1: &[f64],
    group2: &[f64],
    psi: &TransformSpec,
    modification: &ModificationSpec,
    budget: &PrivacyBudget,
    options: &TestOptions,
    rng: &mut R,
) -> Result<PrivateTestResult> {
    let (g1, g2);
    let (group1, group2) = if options.center_medians {
        g1 = centered(group1);
        g2 = centered(group2);
        (&g1[..], &g2[..])
    } else {
        (group1, group2)
    };
    let n = group1.len() + group2.len();
    let q_count = modification.resolve(n)?;
    if n < q_count || n - q_count < 2 {
        return Err(Error::QTooLarge { q_count, n });
    }
    let sample = rank_with_options(group1, group2, modification, options, rng)?;
    let stat = stats::u1_statistic(&sample, psi);
    let bound = stats::sensitivity_bound(psi, n, q_count)?;
    let (statistic_private, noise_scale) =
        privacy::privatize(stat.u1, bound.gs_star, budget.eps_u, rng);
    let estimate =
        privacy::private_group_disparity(sample.n1, n, budget.eps_d, budget.delta, rng);
    let base_var = stats::null_variance(estimate.n1_tilde, estimate.n2_tilde, psi, q_count);
    let sigma_tilde = math::sqrt(base_var + 2.0 * noise_scale * noise_scale);
    if !(sigma_tilde > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let z_score = statistic_private.abs() / sigma_tilde;
    Ok(PrivateTestResult {
        statistic_private,
        noise_scale,
        sigma_tilde,
        z_score,
        p_value: math::normal_two_sided_p(z_score),
        group_estimate: Some(estimate),
        eps_u: budget.eps_u,
        eps_d: Some(budget.eps_d),
        delta: Some(budget.delta),
        eps_total: privacy::compose(&[(budget.eps_u, 0.0), (budget.eps_d, budget.delta)]).0,
        psi: *psi,
        q: modification.proportion(),
        q_count,
        n,
    })
}

/// Private rank-transformed percentile-modified signed-rank test for paired
/// data. The pair count is treated as public, so the whole budget goes to
/// the statistic.
pub fn rpsr_test<R: RngCore + ?Sized>(
    pairs: &[(f64, f64)],
    psi: &TransformSpec,
    modification: &ModificationSpec,
    eps_u: f64,
    options: &TestOptions,
    rng: &mut R,
) -> Result<PrivateTestResult> {
    if !(eps_u > 0.0) {
        return Err(Error::InvalidParameter("eps_u must be > 0"));
    }
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InvalidParameter("at least two pairs are required"));
    }
    let q_count = modification.resolve(n)?;
    if q_count >= n {
        return Err(Error::QTooLarge { q_count, n });
    }
    let sample = match options.tie_jitter {
        Some(scale) => ranks::signed_rank_data_with_jitter(pairs, modification, scale, rng)?,
        None => ranks::signed_rank_data(pairs, modification)?,
    };
    let w1 = stats::w1_statistic(&sample, psi);
    let gs = stats::w1_sensitivity(psi, n, q_count);
    let (statistic_private, noise_scale) = privacy::privatize(w1, gs, eps_u, rng);
    let base_var = stats::w1_null_variance(psi, n, q_count);
    let sigma_tilde = math::sqrt(base_var + 2.0 * noise_scale * noise_scale);
    if !(sigma_tilde > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let z_score = statistic_private.abs() / sigma_tilde;
    Ok(PrivateTestResult {
        statistic_private,
        noise_scale,
        sigma_tilde,
        z_score,
        p_value: math::normal_two_sided_p(z_score),
        group_estimate: None,
        eps_u,
        eps_d: None,
        delta: None,
        eps_total: eps_u,
        psi: *psi,
        q: modification.proportion(),
        q_count,
        n,
    })
}

/// Lower edge of the alpha validity window: 1 - erf(sqrt(3(n-1)/2)).
pub fn alpha_validity_lower_bound(n: usize) -> f64 {
    1.0 - math::erf(math::sqrt(1.5 * (n as f64 - 1.0)))
}

/// Half-normal critical value
/// pi_alpha = m(n-m)/2 - sqrt(m(n-m)(n+1)/12) * sqrt(2) * erfinv(1 - alpha).
pub fn half_normal_critical(m: usize, n: usize, alpha: f64) -> f64 {
    debug_assert!(2 * m <= n && alpha > 0.0 && alpha < 0.5);
    let prod = (m * (n - m)) as f64;
    prod / 2.0 - math::sqrt(prod * (n as f64 + 1.0) / 12.0) * math::SQRT_2 * math::erf_inv(1.0 - alpha)
}

/// Classical (non-private) Siegel-Tukey test with half-normal critical
/// values; rejects when the min-form statistic falls below pi_alpha.
pub fn classic_siegel_tukey(
    group1: &[f64],
    group2: &[f64],
    alpha: f64,
) -> Result<ClassicTestResult> {
    if group1.is_empty() || group2.is_empty() {
        return Err(Error::InvalidParameter("both groups must be non-empty"));
    }
    let n1 = group1.len();
    let n2 = group2.len();
    let n = n1 + n2;
    let lower = alpha_validity_lower_bound(n);
    if !(alpha > lower && alpha < 0.5) {
        return Err(Error::AlphaOutOfRange { alpha, lower });
    }
    let mut combined = Vec::with_capacity(n);
    combined.extend_from_slice(group1);
    combined.extend_from_slice(group2);
    if combined.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("observations must be finite"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| combined[a].partial_cmp(&combined[b]).unwrap());
    if order.windows(2).any(|w| combined[w[0]] == combined[w[1]]) {
        return Err(Error::TiesWithoutJitter);
    }
    let rank_values = classic_siegel_tukey_ranks(n);
    let mut u1_hat = 0.0;
    let mut u2_hat = 0.0;
    for (pos, &idx) in order.iter().enumerate() {
        if idx < n1 {
            u1_hat += rank_values[pos] as f64;
        } else {
            u2_hat += rank_values[pos] as f64;
        }
    }
    let statistic = (u1_hat - (n1 * (n1 + 1)) as f64 / 2.0)
        .min(u2_hat - (n2 * (n2 + 1)) as f64 / 2.0);
    let m = n1.min(n2);
    let critical_value = half_normal_critical(m, n, alpha);
    Ok(ClassicTestResult {
        statistic,
        critical_value,
        reject: statistic < critical_value,
        alpha,
        m,
        n,
    })
}
