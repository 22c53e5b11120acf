//! Laplace mechanism, the deliberately conservative private group-size
//! disparity estimate, and privacy-budget composition.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::math;

/// Privacy budget for the two-sample test: eps_u buys noise on the
/// statistic, eps_d buys the group-size disparity estimate, and delta is the
/// leakage probability of the disparity step. The pair is jointly
/// (eps_u + eps_d, delta)-differentially private by basic composition.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrivacyBudget {
    pub eps_u: f64,
    pub eps_d: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(eps_u: f64, eps_d: f64, delta: f64) -> Result<Self> {
        if !(eps_u > 0.0) {
            return Err(Error::InvalidParameter("eps_u must be > 0"));
        }
        if !(eps_d > 0.0) {
            return Err(Error::InvalidParameter("eps_d must be > 0"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0,1)"));
        }
        Ok(PrivacyBudget { eps_u, eps_d, delta })
    }

    /// Split a total budget, giving `frac_to_stat` of it to eps_u.
    /// The 80/20 split is the recommended default.
    pub fn split_total(eps: f64, frac_to_stat: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be > 0"));
        }
        if !(frac_to_stat > 0.0 && frac_to_stat < 1.0) {
            return Err(Error::InvalidParameter("split fraction must lie in (0,1)"));
        }
        PrivacyBudget::new(eps * frac_to_stat, eps * (1.0 - frac_to_stat), delta)
    }

    pub fn total(&self) -> f64 {
        self.eps_u + self.eps_d
    }
}

/// Default fraction of the total budget spent on the statistic.
pub const DEFAULT_SPLIT: f64 = 0.8;

/// Conservative private estimate of d1 = |n1 - n/2| and the group sizes
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupSizeEstimate {
    pub d1_star: f64,
    pub n1_tilde: f64,
    pub n2_tilde: f64,
}

/// Uniform draw on the open interval (0, 1) from 53 random bits.
pub fn open_unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Inverse CDF of the standard Laplace distribution at u in (0, 1).
pub fn standard_laplace_inverse_cdf(u: f64) -> f64 {
    let t = u - 0.5;
    -t.signum() * math::log(1.0 - 2.0 * math::fabs(t))
}

/// One draw from the Laplace distribution with the given scale.
pub fn laplace_sample<R: RngCore + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    debug_assert!(scale > 0.0);
    scale * standard_laplace_inverse_cdf(open_unit_uniform(rng))
}

/// Add Laplace noise calibrated to a sensitivity bound: the result is
/// (stat + Z * gs_star/eps, gs_star/eps). An infinite eps injects no noise.
pub fn privatize<R: RngCore + ?Sized>(
    stat: f64,
    gs_star: f64,
    eps: f64,
    rng: &mut R,
) -> (f64, f64) {
    debug_assert!(gs_star > 0.0 && eps > 0.0);
    let noise_scale = gs_star / eps;
    let z = standard_laplace_inverse_cdf(open_unit_uniform(rng));
    (stat + noise_scale * z, noise_scale)
}

/// The disparity estimate computed from an explicit standard-Laplace draw.
///
/// d1* = max{ceil(d1 + z'/eps_d + ln(2 delta)/eps_d), 0}, then the odd-n
/// half-integer adjustment, then a clamp at n/2 - 1 so the smaller estimated
/// group keeps at least one member. The subtraction inside the ceiling makes
/// d1* <= d1 except with probability at most delta, which is what keeps the
/// plugged-in null variance conservative.
pub fn group_disparity_from_noise(
    n1: usize,
    n: usize,
    eps_d: f64,
    delta: f64,
    z_prime: f64,
) -> GroupSizeEstimate {
    debug_assert!(n >= 2 && n1 >= 1 && n1 <= n - 1);
    let half_n = n as f64 / 2.0;
    let d1 = (n1 as f64 - half_n).abs();
    let d_noisy = d1 + z_prime / eps_d;
    let mut d_star = math::ceil(d_noisy + math::log(2.0 * delta) / eps_d).max(0.0);
    if n % 2 == 1 {
        if d_star != 0.0 {
            d_star -= 0.5;
        } else {
            d_star = 0.5;
        }
    }
    let cap = half_n - 1.0;
    if d_star > cap {
        d_star = cap;
    }
    let n1_tilde = half_n - d_star;
    GroupSizeEstimate {
        d1_star: d_star,
        n1_tilde,
        n2_tilde: n as f64 - n1_tilde,
    }
}

/// Private group-size disparity estimate, spending eps_d and delta.
pub fn private_group_disparity<R: RngCore + ?Sized>(
    n1: usize,
    n: usize,
    eps_d: f64,
    delta: f64,
    rng: &mut R,
) -> GroupSizeEstimate {
    let z = standard_laplace_inverse_cdf(open_unit_uniform(rng));
    group_disparity_from_noise(n1, n, eps_d, delta, z)
}

/// Basic composition: component-wise sums of (eps, delta) pairs.
pub fn compose(budgets: &[(f64, f64)]) -> (f64, f64) {
    budgets
        .iter()
        .fold((0.0, 0.0), |(e, d), &(ei, di)| (e + ei, d + di))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn laplace_inverse_cdf_values() {
        assert_eq!(standard_laplace_inverse_cdf(0.5), 0.0);
        let ln2 = core::f64::consts::LN_2;
        assert!((standard_laplace_inverse_cdf(0.75) - ln2).abs() < 1e-15);
        assert!((standard_laplace_inverse_cdf(0.25) + ln2).abs() < 1e-15);
    }

    #[test]
    fn laplace_sample_variance_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scale = 1.7;
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = laplace_sample(scale, &mut rng);
            sum += x;
            sum_sq += x * x;
        }
        let var = sum_sq / n as f64 - (sum / n as f64).powi(2);
        let expected = 2.0 * scale * scale;
        assert!((var - expected).abs() < 0.05 * expected, "var={var}");
    }

    #[test]
    fn laplace_sample_matches_analytic_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scale = 2.0;
        let n = 100_000usize;
        let mut draws: alloc::vec::Vec<f64> =
            (0..n).map(|_| laplace_sample(scale, &mut rng)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cdf = |x: f64| {
            if x < 0.0 {
                0.5 * math::exp(x / scale)
            } else {
                1.0 - 0.5 * math::exp(-x / scale)
            }
        };
        let mut ks = 0.0f64;
        for (i, &x) in draws.iter().enumerate() {
            let f = cdf(x);
            ks = ks.max((f - i as f64 / n as f64).abs());
            ks = ks.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(ks < 0.01, "ks={ks}");
    }

    #[test]
    fn privatize_with_infinite_eps_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (value, scale) = privatize(2.0, 4.5, f64::INFINITY, &mut rng);
        assert_eq!(value, 2.0);
        assert_eq!(scale, 0.0);
    }

    #[test]
    fn privatize_upper_quartile_noise() {
        // u = 0.75 corresponds to + ln 2 on the standard Laplace
        let stat = 2.0 + 4.5 * core::f64::consts::LN_2;
        let z = standard_laplace_inverse_cdf(0.75);
        assert!((2.0 + 4.5 * z - stat).abs() < 1e-12);
    }

    #[test]
    fn disparity_examples_with_zero_noise() {
        let est = group_disparity_from_noise(60, 100, 5.0, 1e-6, 0.0);
        assert_eq!(est.d1_star, 8.0);
        assert_eq!(est.n1_tilde, 42.0);
        assert_eq!(est.n2_tilde, 58.0);

        let est = group_disparity_from_noise(60, 100, 0.5, 1e-6, 0.0);
        assert_eq!(est.d1_star, 0.0);
        assert_eq!(est.n1_tilde, 50.0);

        let est = group_disparity_from_noise(51, 101, 5.0, 1e-6, 0.0);
        assert_eq!(est.d1_star, 0.5);
        assert_eq!(est.n1_tilde, 50.0);
    }

    #[test]
    fn disparity_clamp_keeps_group_nonempty() {
        // enormous negative ln(2 delta)/eps never drives n1_tilde below 1,
        // and a huge positive noise draw is capped at n/2 - 1.
        let est = group_disparity_from_noise(5, 10, 0.01, 0.49, 1e6);
        assert!(est.n1_tilde >= 1.0);
        assert_eq!(est.d1_star, 4.0);
        let est = group_disparity_from_noise(1, 3, 1.0, 0.05, 1e6);
        assert_eq!(est.d1_star, 0.5);
        assert_eq!(est.n1_tilde, 1.0);
    }

    #[test]
    fn disparity_underestimates_with_probability_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (n1, n, eps_d, delta) = (60usize, 100usize, 1.0, 0.05);
        let d1 = 10.0;
        let reps = 20_000;
        let mut exceed = 0usize;
        for _ in 0..reps {
            let est = private_group_disparity(n1, n, eps_d, delta, &mut rng);
            if est.d1_star > d1 {
                exceed += 1;
            }
        }
        let frac = exceed as f64 / reps as f64;
        let se = (delta * (1.0 - delta) / reps as f64).sqrt();
        assert!(frac <= delta + 3.0 * se, "frac={frac}");
    }

    #[test]
    fn compose_sums_pairs() {
        assert_eq!(compose(&[(0.4, 0.0), (0.1, 1e-6)]), (0.5, 1e-6));
        assert_eq!(compose(&[(0.7, 1e-3)]), (0.7, 1e-3));
        let (e, d) = compose(&[(0.8, 0.0), (0.2, 1e-6)]);
        assert!((e - 1.0).abs() < 1e-15);
        assert_eq!(d, 1e-6);
    }
}
