//! Property tests for the structural invariants of the ranking, transform,
//! statistic and privacy layers. The heavyweight enumeration checks live in
//! the acceptance suite; these stay quick.

use proptest::collection::vec;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use rpst_core::privacy::{group_disparity_from_noise, private_group_disparity};
use rpst_core::ranks::{
    center_outward_rank_values, rank_data, signed_rank_data, Alternation, ModificationSpec,
};
use rpst_core::stats::{null_variance, srswor_moments, u1_statistic};
use rpst_core::transforms::{psi_bar_q, TransformSpec};
use rpst_core::{hypothesis, oracle};

fn all_transforms() -> [TransformSpec; 5] {
    TransformSpec::standard_family()
}

fn distinct(values: &[f64]) -> bool {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.windows(2).all(|w| w[0] != w[1])
}

proptest! {
    #[test]
    fn rank_value_multiset_is_exact(n in 1usize..60, q_frac in 0.0f64..1.0, pairwise in any::<bool>()) {
        let q_count = (n as f64 * q_frac) as usize;
        let scheme = if pairwise { Alternation::Pairwise } else { Alternation::OneAtATime };
        let mut vals = scheme.rank_values(n, q_count);
        vals.sort_unstable();
        let mut expect = vec![0usize; q_count];
        expect.extend(1..=n - q_count);
        prop_assert_eq!(vals, expect);
    }

    #[test]
    fn ranks_are_equivariant_under_monotone_maps(
        g1 in vec(-50.0f64..50.0, 1..12),
        g2 in vec(-50.0f64..50.0, 1..12),
        q in 0.0f64..1.0,
    ) {
        prop_assume!(distinct(&[g1.clone(), g2.clone()].concat()));
        let mspec = ModificationSpec::Proportion(q);
        let base = rank_data(&g1, &g2, &mspec, Alternation::OneAtATime).unwrap();
        for map in [|x: f64| x.exp(), |x: f64| x * x * x + 2.0 * x, |x: f64| 0.25 * x - 3.0] {
            let m1: Vec<f64> = g1.iter().map(|&x| map(x)).collect();
            let m2: Vec<f64> = g2.iter().map(|&x| map(x)).collect();
            let mapped = rank_data(&m1, &m2, &mspec, Alternation::OneAtATime).unwrap();
            prop_assert_eq!(&base.ranks, &mapped.ranks);
        }
    }

    #[test]
    fn label_swap_flips_flags_only(
        g1 in vec(-50.0f64..50.0, 1..10),
        g2 in vec(-50.0f64..50.0, 1..10),
    ) {
        prop_assume!(distinct(&[g1.clone(), g2.clone()].concat()));
        let mspec = ModificationSpec::Proportion(0.3);
        let a = rank_data(&g1, &g2, &mspec, Alternation::OneAtATime).unwrap();
        let b = rank_data(&g2, &g1, &mspec, Alternation::OneAtATime).unwrap();
        // same observation keeps its rank, flags flip
        let n1 = g1.len();
        let n2 = g2.len();
        for i in 0..n1 {
            prop_assert_eq!(a.ranks[i], b.ranks[n2 + i]);
            prop_assert!(a.group_flags[i] && !b.group_flags[n2 + i]);
        }
        for j in 0..n2 {
            prop_assert_eq!(a.ranks[n1 + j], b.ranks[j]);
            prop_assert!(!a.group_flags[n1 + j] && b.group_flags[j]);
        }
    }

    #[test]
    fn signed_ranks_are_a_permutation(pairs in vec((-20.0f64..20.0, -20.0f64..20.0), 1..15)) {
        let diffs: Vec<f64> = pairs.iter().map(|&(x, y)| y - x).collect();
        prop_assume!(diffs.iter().all(|&d| d != 0.0));
        prop_assume!(distinct(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>()));
        let s = signed_rank_data(&pairs, &ModificationSpec::Count(0)).unwrap();
        let mut ranks = s.ranks.clone();
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (1..=pairs.len()).collect::<Vec<_>>());
    }

    #[test]
    fn psi_bar_is_non_increasing_in_q(n in 2usize..40) {
        for psi in all_transforms() {
            let mut prev = f64::INFINITY;
            for q in 0..=n {
                let v = psi_bar_q(&psi, n, q);
                prop_assert!(v <= prev + 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn u1_shift_robustness(
        g1 in vec(-9.0f64..9.0, 2..8),
        g2 in vec(-9.0f64..9.0, 2..8),
        shift in -100.0f64..100.0,
    ) {
        prop_assume!(distinct(&[g1.clone(), g2.clone()].concat()));
        let mspec = ModificationSpec::Proportion(0.25);
        let sample = rank_data(&g1, &g2, &mspec, Alternation::OneAtATime).unwrap();
        for psi in all_transforms() {
            let u1 = u1_statistic(&sample, &psi).u1;
            // centered statistic with psi + shift, centering by the exact
            // expectation of the shifted values (zeros map to the shift)
            let raw: f64 = sample.ranks.iter().zip(&sample.group_flags)
                .filter(|(_, &f)| f)
                .map(|(&r, _)| psi.apply(r) + shift)
                .sum();
            let total: f64 = sample.ranks.iter().map(|&r| psi.apply(r) + shift).sum();
            let shifted = raw - sample.n1 as f64 / sample.n as f64 * total;
            prop_assert!((shifted - u1).abs() < 1e-7 * (1.0 + u1.abs() + shift.abs()));
        }
    }

    #[test]
    fn srswor_symmetry_and_unimodality(values in vec(0.0f64..40.0, 2..10)) {
        prop_assume!(values.iter().any(|&v| v != values[0]));
        let n = values.len();
        for k in 0..=n {
            let (_, vk) = srswor_moments(&values, k);
            let (_, vnk) = srswor_moments(&values, n - k);
            prop_assert!((vk - vnk).abs() < 1e-9 * (1.0 + vk.abs()));
        }
        // variance strictly increases toward the middle
        for k in 0..n / 2 {
            let (_, lo) = srswor_moments(&values, k);
            let (_, hi) = srswor_moments(&values, k + 1);
            prop_assert!(hi > lo - 1e-12);
        }
    }

    #[test]
    fn disparity_estimate_is_conservative_in_variance(
        n in 4usize..200,
        n1_frac in 0.1f64..0.9,
        eps_d in 0.05f64..5.0,
        noise in -30.0f64..30.0,
    ) {
        let n1 = ((n as f64 * n1_frac) as usize).clamp(1, n - 1);
        let est = group_disparity_from_noise(n1, n, eps_d, 0.05, noise);
        prop_assert!(est.n1_tilde >= 1.0);
        prop_assert!(est.n1_tilde <= n as f64 / 2.0);
        let d1 = (n1 as f64 - n as f64 / 2.0).abs();
        let psi = TransformSpec::Log1p;
        let sigma_est = null_variance(est.n1_tilde, est.n2_tilde, &psi, n / 4);
        let sigma_true = null_variance(n1 as f64, (n - n1) as f64, &psi, n / 4);
        if est.d1_star <= d1 {
            prop_assert!(sigma_est >= sigma_true - 1e-9 * sigma_true);
        } else {
            prop_assert!(sigma_est <= sigma_true + 1e-9 * sigma_true);
        }
    }
}

#[test]
fn exact_null_matches_closed_forms_quick() {
    for psi in all_transforms() {
        for n in 2usize..=7 {
            for n1 in 1..n {
                for q in 0..=n.saturating_sub(2) {
                    let d = oracle::exact_u1_null(n, n1, q, &psi).unwrap();
                    let v = null_variance(n1 as f64, (n - n1) as f64, &psi, q);
                    assert!(d.mean().abs() < 1e-12);
                    assert!(
                        (d.variance() - v).abs() <= 1e-9 * v.max(1e-12),
                        "psi={psi} n={n} n1={n1} q={q}"
                    );
                }
            }
        }
    }
}

#[test]
fn sensitivity_bound_dominates_oracle_quick() {
    for psi in all_transforms() {
        for n in 2usize..=6 {
            for n1 in 1..n {
                for q in 0..=n.saturating_sub(2) {
                    let got = oracle::exhaustive_u1_sensitivity(n1, n - n1, q, &psi).unwrap();
                    let bound = rpst_core::stats::sensitivity_bound(&psi, n, q)
                        .unwrap()
                        .gs_star;
                    assert!(got <= bound + 1e-12, "psi={psi} n={n} n1={n1} q={q}");
                }
            }
        }
    }
}

#[test]
fn private_test_p_values_are_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = rpst_core::PrivacyBudget::split_total(1.0, 0.8, 1e-6).unwrap();
    for _ in 0..200 {
        let g1: Vec<f64> = (0..20).map(|_| standard_normal(&mut rng)).collect();
        let g2: Vec<f64> = (0..20).map(|_| standard_normal(&mut rng)).collect();
        let r = hypothesis::rpst_test(
            &g1,
            &g2,
            &TransformSpec::Arctan,
            &ModificationSpec::Proportion(0.5),
            &budget,
            &rpst_core::TestOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(r.p_value >= 0.0 && r.p_value <= 1.0);
        assert!(r.sigma_tilde > 0.0);
    }
}

#[test]
fn disparity_overshoot_rate_is_at_most_delta() {
    // delta-level bound on P(d1* > d1), plus the variance-order equivalence
    // on every draw
    let mut rng = ChaCha8Rng::seed_from_u64(12345);
    let psi = TransformSpec::Identity;
    for (n, n1, eps_d) in [(100usize, 60usize, 0.5f64), (101, 51, 1.0), (60, 30, 2.0)] {
        let delta = 0.05;
        let reps = 10_000;
        let d1 = (n1 as f64 - n as f64 / 2.0).abs();
        let sigma_true = null_variance(n1 as f64, (n - n1) as f64, &psi, 0);
        let mut overshoot = 0usize;
        for _ in 0..reps {
            let est = private_group_disparity(n1, n, eps_d, delta, &mut rng);
            let sigma_est = null_variance(est.n1_tilde, est.n2_tilde, &psi, 0);
            if est.d1_star > d1 {
                overshoot += 1;
                assert!(sigma_est <= sigma_true);
            } else {
                assert!(sigma_est >= sigma_true - 1e-9 * sigma_true);
            }
        }
        let frac = overshoot as f64 / reps as f64;
        let se = (delta * (1.0 - delta) / reps as f64).sqrt();
        assert!(frac <= delta + 3.0 * se, "n={n} frac={frac}");
    }
}

#[test]
fn transforms_strictly_increase_on_grid() {
    for psi in all_transforms() {
        psi.validate_on_grid(5000).unwrap();
    }
    TransformSpec::power(0.17).unwrap().validate_on_grid(500).unwrap();
}

#[test]
fn classic_null_distribution_equals_wilcoxon_quick() {
    // subset sums of the alternating ranks match subset sums of linear ranks
    for n in 2usize..=7 {
        let st = rpst_core::ranks::classic_siegel_tukey_ranks(n);
        for n1 in 1..n {
            let mut st_sums = subset_sums(&st, n1);
            let linear: Vec<usize> = (1..=n).collect();
            let mut w_sums = subset_sums(&linear, n1);
            st_sums.sort_unstable();
            w_sums.sort_unstable();
            assert_eq!(st_sums, w_sums, "n={n} n1={n1}");
        }
    }
}

fn subset_sums(values: &[usize], k: usize) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).sum());
        }
    }
    out
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller is plenty for test data
    let u1 = rpst_core::privacy::open_unit_uniform(rng);
    let u2 = rpst_core::privacy::open_unit_uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

#[test]
fn half_normal_critical_monotone_sample() {
    for n in [10usize, 37, 100, 173] {
        let mut prev = f64::NEG_INFINITY;
        for m in 1..=n / 2 {
            let c = hypothesis::half_normal_critical(m, n, 0.05);
            assert!(c > prev, "n={n} m={m}");
            prev = c;
        }
    }
}
