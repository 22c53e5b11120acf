//! Monte Carlo engine: empirical size and power of the private tests under
//! configurable populations, group sizes and budgets.
//!
//! Every replication draws from its own counter-derived random stream, so a
//! cell's result depends only on (config, seed) and never on how many
//! workers execute it.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use rpst_core::math;
use rpst_core::privacy::PrivacyBudget;
use rpst_core::ranks::{rank_data, Alternation, ModificationSpec};
use rpst_core::stats::{null_variance, u1_statistic};
use rpst_core::transforms::TransformSpec;
use rpst_core::{classic_siegel_tukey, rpsr_test, rpst_test, Error, Result, TestOptions};

/// Population family. Scale always enters multiplicatively around location
/// zero, so group 2 drawn with scale theta satisfies F(x) = G(theta x).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Family {
    Normal,
    Exponential,
    /// Pareto type II with the given shape; finite variance needs shape > 2.
    Lomax { shape: f64 },
    StudentT { dof: f64 },
}

impl Family {
    /// Parse a family name, attaching the configured shape parameters.
    pub fn parse(name: &str, lomax_shape: f64, t_dof: f64) -> Result<Family> {
        match name {
            "normal" => Ok(Family::Normal),
            "exponential" => Ok(Family::Exponential),
            "lomax" => {
                if !(lomax_shape > 0.0) {
                    return Err(Error::InvalidParameter("lomax shape must be > 0"));
                }
                Ok(Family::Lomax { shape: lomax_shape })
            }
            "student_t" | "t" => {
                if !(t_dof > 0.0) {
                    return Err(Error::InvalidParameter("t degrees of freedom must be > 0"));
                }
                Ok(Family::StudentT { dof: t_dof })
            }
            _ => Err(Error::InvalidParameter(
                "family must be normal, exponential, lomax or student_t",
            )),
        }
    }

    fn standard_draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Family::Normal => StandardNormal.sample(rng),
            // inverse CDF: -ln(1-u)
            Family::Exponential => -math::log1p(-open_unit(rng)),
            // inverse CDF: (1-u)^(-1/shape) - 1
            Family::Lomax { shape } => math::pow(1.0 - open_unit(rng), -1.0 / shape) - 1.0,
            // ratio method: Z / sqrt(V/dof)
            Family::StudentT { dof } => {
                let z: f64 = StandardNormal.sample(rng);
                let v = ChiSquared::new(dof).expect("dof > 0").sample(rng);
                z / (v / dof).sqrt()
            }
        }
    }

    /// Quantile function of the standard (location 0, scale 1) member.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0);
        match *self {
            Family::Normal => math::SQRT_2 * math::erf_inv(2.0 * p - 1.0),
            Family::Exponential => -math::log1p(-p),
            Family::Lomax { shape } => math::pow(1.0 - p, -1.0 / shape) - 1.0,
            Family::StudentT { dof } => StudentsT::new(0.0, 1.0, dof)
                .expect("dof > 0")
                .inverse_cdf(p),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Normal => write!(f, "normal"),
            Family::Exponential => write!(f, "exponential"),
            Family::Lomax { shape } => write!(f, "lomax({shape})"),
            Family::StudentT { dof } => write!(f, "t({dof})"),
        }
    }
}

fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// I.i.d. draws with the given location and scale.
pub fn sample_population<R: Rng>(
    family: Family,
    location: f64,
    scale: f64,
    size: usize,
    rng: &mut R,
) -> Vec<f64> {
    debug_assert!(scale > 0.0);
    (0..size)
        .map(|_| location + scale * family.standard_draw(rng))
        .collect()
}

/// Paired draws whose dependence is a Gaussian copula with correlation rho;
/// both coordinates carry the margin's distribution and `effect` is added to
/// the second coordinate.
pub fn gaussian_copula_pairs<R: Rng>(
    n: usize,
    rho: f64,
    effect: f64,
    margin: Family,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    if !(-1.0 < rho && rho < 1.0) {
        return Err(Error::InvalidParameter("copula rho must lie in (-1,1)"));
    }
    let mix = (1.0 - rho * rho).sqrt();
    Ok((0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(rng);
            let z2 = rho * z1 + mix * StandardNormal.sample(rng);
            let (x, y) = match margin {
                // the normal margin's quantile of Phi(z) is z itself
                Family::Normal => (z1, z2),
                _ => (
                    margin.quantile(math::normal_cdf(z1)),
                    margin.quantile(math::normal_cdf(z2)),
                ),
            };
            (x, y + effect)
        })
        .collect())
}

/// Which test a simulation cell runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Rpst,
    Rpsr,
    Classic,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestKind::Rpst => write!(f, "rpst"),
            TestKind::Rpsr => write!(f, "rpsr"),
            TestKind::Classic => write!(f, "classic"),
        }
    }
}

/// One Monte Carlo cell.
///
/// `theta` is the group-2 scale ratio for the two-sample kinds and the
/// paired mean shift for `rpsr`; `split` is the fraction of `eps` given to
/// the statistic (the rest buys the group-size estimate).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimConfig {
    pub test_kind: TestKind,
    pub family: Family,
    pub theta: f64,
    pub n: usize,
    pub n1: usize,
    pub q: f64,
    pub psi: TransformSpec,
    pub eps: f64,
    pub split: f64,
    pub delta: f64,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    pub copula_rho: f64,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be >= 1"));
        }
        if self.n1 == 0 || self.n1 >= self.n {
            return Err(Error::InvalidParameter("need 1 <= n1 <= n-1"));
        }
        if !(0.0..1.0).contains(&self.q) {
            return Err(Error::InvalidParameter("q must lie in [0,1)"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter("alpha must lie in (0,1)"));
        }
        match self.test_kind {
            TestKind::Rpsr => {
                if !self.theta.is_finite() {
                    return Err(Error::InvalidParameter("effect size must be finite"));
                }
            }
            _ => {
                if !(self.theta > 0.0) {
                    return Err(Error::InvalidParameter("scale ratio theta must be > 0"));
                }
            }
        }
        if self.test_kind != TestKind::Classic && !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be > 0"));
        }
        if self.test_kind == TestKind::Rpst && !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidParameter("split must lie in (0,1)"));
        }
        Ok(())
    }

    fn budget(&self) -> Result<PrivacyBudget> {
        PrivacyBudget::split_total(self.eps, self.split, self.delta)
    }
}

/// Rejection-rate estimate for one cell.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimResult {
    pub rejection_rate: f64,
    pub mc_standard_error: f64,
    pub reps: usize,
    pub seconds: f64,
    pub config: SimConfig,
}

/// The stream for replication `rep` of a cell seeded with `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn one_replication(config: &SimConfig, rep: usize) -> Result<bool> {
    let mut rng = replication_rng(config.seed, rep as u64);
    let modification = ModificationSpec::Proportion(config.q);
    let options = TestOptions::default();
    match config.test_kind {
        TestKind::Rpst => {
            let g1 = sample_population(config.family, 0.0, 1.0, config.n1, &mut rng);
            let g2 = sample_population(
                config.family,
                0.0,
                config.theta,
                config.n - config.n1,
                &mut rng,
            );
            let r = rpst_test(
                &g1,
                &g2,
                &config.psi,
                &modification,
                &config.budget()?,
                &options,
                &mut rng,
            )?;
            Ok(r.p_value < config.alpha)
        }
        TestKind::Rpsr => {
            let pairs = gaussian_copula_pairs(
                config.n,
                config.copula_rho,
                config.theta,
                config.family,
                &mut rng,
            )?;
            let r = rpsr_test(
                &pairs,
                &config.psi,
                &modification,
                config.eps,
                &options,
                &mut rng,
            )?;
            Ok(r.p_value < config.alpha)
        }
        TestKind::Classic => {
            let g1 = sample_population(config.family, 0.0, 1.0, config.n1, &mut rng);
            let g2 = sample_population(
                config.family,
                0.0,
                config.theta,
                config.n - config.n1,
                &mut rng,
            );
            let r = classic_siegel_tukey(&g1, &g2, config.alpha)?;
            Ok(r.reject)
        }
    }
}

/// Run all replications of one cell and estimate its rejection rate.
pub fn estimate_size_power(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let started = Instant::now();
    let rejections = (0..config.reps)
        .into_par_iter()
        .map(|rep| one_replication(config, rep).map(usize::from))
        .try_reduce(|| 0usize, |a, b| Ok(a + b))?;
    let p_hat = rejections as f64 / config.reps as f64;
    Ok(SimResult {
        rejection_rate: p_hat,
        mc_standard_error: (p_hat * (1.0 - p_hat) / config.reps as f64).sqrt(),
        reps: config.reps,
        seconds: started.elapsed().as_secs_f64(),
        config: config.clone(),
    })
}

/// Monte Carlo estimate of the standardized mean shift of the group-1
/// transformed rank sum under the configured alternative:
/// (E sum_{group 1} psi(r_i) - (n1/n) sum psi(i)) / sigma(n1, n2, psi, Q).
pub fn estimate_beta_n(
    family: Family,
    theta: f64,
    n: usize,
    n1: usize,
    psi: &TransformSpec,
    q_count: usize,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    if n1 == 0 || n1 >= n {
        return Err(Error::InvalidParameter("need 1 <= n1 <= n-1"));
    }
    let modification = ModificationSpec::Count(q_count);
    let total: f64 = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut rng = replication_rng(seed, rep as u64);
            let g1 = sample_population(family, 0.0, 1.0, n1, &mut rng);
            let g2 = sample_population(family, 0.0, theta, n - n1, &mut rng);
            let sample = rank_data(&g1, &g2, &modification, Alternation::OneAtATime)?;
            Ok(u1_statistic(&sample, psi).u1)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a + b))?;
    let sigma = null_variance(n1 as f64, (n - n1) as f64, psi, q_count).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    Ok(total / reps as f64 / sigma)
}

/// Outcome of one sweep cell; errors are recorded and the sweep continues.
pub type CellOutcome = std::result::Result<SimResult, String>;

/// Run every cell of a grid in order.
pub fn sweep(configs: &[SimConfig]) -> Vec<CellOutcome> {
    configs
        .iter()
        .map(|c| estimate_size_power(c).map_err(|e| e.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SimConfig {
        SimConfig {
            test_kind: TestKind::Rpst,
            family: Family::Normal,
            theta: 1.0,
            n: 60,
            n1: 30,
            q: 0.5,
            psi: TransformSpec::Arctan,
            eps: 1.0,
            split: 0.8,
            delta: 1e-6,
            alpha: 0.05,
            reps: 200,
            seed: 77,
            copula_rho: 0.5,
        }
    }

    #[test]
    fn exponential_inverse_cdf_value() {
        // u = 1 - e^-1 maps to exactly 1
        let p = 1.0 - (-1.0f64).exp();
        assert!((Family::Exponential.quantile(p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_sample_mean_and_scale() {
        let mut rng = replication_rng(3, 0);
        let xs = sample_population(Family::Normal, 0.0, 1.0, 100_000, &mut rng);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01, "{mean}");
        let scaled = sample_population(Family::Normal, 0.0, 3.0, 100_000, &mut rng);
        let var = scaled.iter().map(|x| x * x).sum::<f64>() / scaled.len() as f64;
        assert!((var - 9.0).abs() < 0.2, "{var}");
    }

    #[test]
    fn lomax_quantile_matches_closed_form() {
        let f = Family::Lomax { shape: 2.5 };
        for p in [0.1, 0.5, 0.9] {
            let x = f.quantile(p);
            // CDF(x) = 1 - (1+x)^-shape
            let back = 1.0 - (1.0 + x).powf(-2.5);
            assert!((back - p).abs() < 1e-12);
        }
    }

    #[test]
    fn copula_independence_and_comonotone_limits() {
        let mut rng = replication_rng(9, 0);
        let n = 40_000;
        let pairs = gaussian_copula_pairs(n, 0.0, 0.0, Family::Normal, &mut rng).unwrap();
        let corr = sample_corr(&pairs);
        assert!(corr.abs() < 3.0 / (n as f64).sqrt() * 2.0, "{corr}");

        let pairs = gaussian_copula_pairs(n, 0.999, 0.0, Family::Normal, &mut rng).unwrap();
        let var_diff = pairs.iter().map(|(x, y)| (y - x).powi(2)).sum::<f64>() / n as f64;
        assert!((var_diff - 2.0 * (1.0 - 0.999)).abs() < 0.01, "{var_diff}");

        let pairs = gaussian_copula_pairs(n, 0.5, 0.7, Family::Normal, &mut rng).unwrap();
        let mean_diff = pairs.iter().map(|(x, y)| y - x).sum::<f64>() / n as f64;
        assert!((mean_diff - 0.7).abs() < 0.03, "{mean_diff}");
    }

    #[test]
    fn same_config_same_result_regardless_of_threads() {
        let config = base_config();
        let a = estimate_size_power(&config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_size_power(&config)).unwrap();
        assert_eq!(a.rejection_rate, b.rejection_rate);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(7).build().unwrap();
        let c = pool.install(|| estimate_size_power(&config)).unwrap();
        assert_eq!(a.rejection_rate, c.rejection_rate);
    }

    #[test]
    fn null_rejection_rate_near_alpha() {
        let mut config = base_config();
        config.reps = 500;
        let r = estimate_size_power(&config).unwrap();
        assert!(
            r.rejection_rate <= config.alpha + 3.0 * 0.01,
            "{}",
            r.rejection_rate
        );
        assert!(r.rejection_rate >= 0.01);
    }

    #[test]
    fn beta_n_is_zero_under_the_null() {
        let beta = estimate_beta_n(
            Family::Normal,
            1.0,
            40,
            20,
            &TransformSpec::Identity,
            10,
            2000,
            5,
        )
        .unwrap();
        // SE of the standardized mean is 1/sqrt(reps)
        assert!(beta.abs() < 3.0 / 2000.0f64.sqrt(), "{beta}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = base_config();
        c.q = 1.0;
        assert!(estimate_size_power(&c).is_err());
        let mut c = base_config();
        c.n1 = c.n;
        assert!(estimate_size_power(&c).is_err());
        let mut c = base_config();
        c.theta = 0.0;
        assert!(estimate_size_power(&c).is_err());
    }

    fn sample_corr(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for &(x, y) in pairs {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    }
}
