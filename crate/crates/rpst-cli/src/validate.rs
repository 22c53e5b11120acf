//! The oracle validation suite behind `rpst validate`: exhaustive
//! enumeration ground truths checked against every closed form.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use rpst_core::privacy::private_group_disparity;
use rpst_core::stats::{null_variance, sensitivity_bound, w1_null_variance, w1_sensitivity};
use rpst_core::transforms::TransformSpec;
use rpst_core::{half_normal_critical, oracle, Result};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn report(name: &'static str, passed: bool, detail: String) -> CheckReport {
    CheckReport {
        name,
        passed,
        detail,
    }
}

fn variance_equivalence(max_n: usize) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut cases = 0usize;
    for psi in TransformSpec::standard_family() {
        for n in 2..=max_n {
            for n1 in 1..n {
                for q in 0..=n.saturating_sub(2) {
                    let d = oracle::exact_u1_null(n, n1, q, &psi)?;
                    let v = null_variance(n1 as f64, (n - n1) as f64, &psi, q);
                    let rel = (d.variance() - v).abs() / v.max(1e-12);
                    worst = worst.max(rel).max(d.mean().abs());
                    cases += 1;
                }
            }
        }
    }
    Ok(report(
        "variance-equivalence",
        worst <= 1e-9,
        format!("{cases} cases, worst deviation {worst:.2e}"),
    ))
}

fn sensitivity_exhaustion(max_n: usize) -> Result<CheckReport> {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut cases = 0usize;
    for psi in TransformSpec::standard_family() {
        for n in 2..=max_n.min(oracle::SENSITIVITY_CAP) {
            for n1 in 1..n {
                for q in 0..=n.saturating_sub(2) {
                    let got = oracle::exhaustive_u1_sensitivity(n1, n - n1, q, &psi)?;
                    let bound = sensitivity_bound(&psi, n, q)?.gs_star;
                    worst_excess = worst_excess.max(got - bound);
                    cases += 1;
                }
            }
        }
    }
    Ok(report(
        "sensitivity-exhaustion",
        worst_excess <= 1e-12,
        format!("{cases} cases, worst excess over bound {worst_excess:.2e}"),
    ))
}

fn w1_enumeration(max_n: usize) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut cases = 0usize;
    for psi in TransformSpec::standard_family() {
        for n in 2..=max_n.min(14) {
            for q in 0..=n {
                let d = oracle::exact_w1_null(n, q, &psi)?;
                let v = w1_null_variance(&psi, n, q);
                worst = worst
                    .max((d.variance() - v).abs() / v.max(1e-12))
                    .max(d.mean().abs());
                cases += 1;
            }
        }
        for n in 2..=max_n.min(oracle::SENSITIVITY_CAP) {
            for q in 0..=n {
                let got = oracle::exhaustive_w1_sensitivity(n, q, &psi)?;
                worst_excess = worst_excess.max(got - w1_sensitivity(&psi, n, q));
                cases += 1;
            }
        }
    }
    Ok(report(
        "w1-enumeration",
        worst <= 1e-9 && worst_excess <= 1e-12,
        format!("{cases} cases, worst variance deviation {worst:.2e}, worst sensitivity excess {worst_excess:.2e}"),
    ))
}

fn pi_alpha_monotonicity() -> CheckReport {
    let alpha = 0.05;
    let mut ok = true;
    for n in 3..=200usize {
        let mut prev = f64::NEG_INFINITY;
        for m in 1..=n / 2 {
            let c = half_normal_critical(m, n, alpha);
            if c <= prev {
                ok = false;
            }
            prev = c;
        }
    }
    report(
        "pi-alpha-monotonicity",
        ok,
        "strictly increasing in m for every n in 3..=200".to_string(),
    )
}

fn d1_conservativeness() -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_810);
    let psi = TransformSpec::Log1p;
    let delta = 0.05;
    let reps = 10_000usize;
    let mut ok = true;
    let mut worst_frac: f64 = 0.0;
    for (n, n1) in [(100usize, 60usize), (101, 51), (500, 400)] {
        for eps_d in [0.1, 1.0] {
            let d1 = (n1 as f64 - n as f64 / 2.0).abs();
            let sigma_true = null_variance(n1 as f64, (n - n1) as f64, &psi, n / 4);
            let mut overshoot = 0usize;
            for _ in 0..reps {
                let est = private_group_disparity(n1, n, eps_d, delta, &mut rng);
                let sigma_est = null_variance(est.n1_tilde, est.n2_tilde, &psi, n / 4);
                if est.d1_star > d1 {
                    overshoot += 1;
                } else if sigma_est < sigma_true - 1e-9 * sigma_true {
                    ok = false;
                }
            }
            let frac = overshoot as f64 / reps as f64;
            worst_frac = worst_frac.max(frac);
            let se = (delta * (1.0 - delta) / reps as f64).sqrt();
            if frac > delta + 3.0 * se {
                ok = false;
            }
        }
    }
    report(
        "d1-conservativeness",
        ok,
        format!("worst overshoot fraction {worst_frac:.4} against delta {delta}"),
    )
}

fn transform_validation() -> CheckReport {
    let invalid_rejected = TransformSpec::power(0.0).is_err()
        && TransformSpec::power(-2.0).is_err()
        && TransformSpec::power(f64::NAN).is_err()
        && TransformSpec::parse("bogus").is_err();
    let family_ok = TransformSpec::standard_family()
        .iter()
        .all(|psi| psi.validate_on_grid(2000).is_ok());
    report(
        "transform-validation",
        invalid_rejected && family_ok,
        "psi(0)=0, monotone, nonnegative on the grid; invalid parameters rejected".to_string(),
    )
}

/// Run the whole suite. `Err` means a check could not run at all (for
/// example an enumeration above the cap); a failed check is reported with
/// `passed: false`.
pub fn run_all(max_n: usize) -> Result<Vec<CheckReport>> {
    Ok(vec![
        variance_equivalence(max_n)?,
        sensitivity_exhaustion(max_n)?,
        w1_enumeration(max_n)?,
        pi_alpha_monotonicity(),
        d1_conservativeness(),
        transform_validation(),
    ])
}
