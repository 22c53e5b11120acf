//! Brute-force ground truth, independent of the closed-form paths.
//!
//! Exact null distributions come from full enumeration (subsets for the
//! two-sample statistic, sign vectors for the paired one) and the
//! sensitivity oracles maximize over every adjacent-dataset transition.
//! Everything here is deliberately naive; the closed-form implementations
//! are tested against these.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ranks::center_outward_rank_values;
use crate::transforms::{sum_psi, TransformSpec};

/// Enumeration cap for subset-based oracles.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Largest n accepted by the replacement-sensitivity oracles.
pub const SENSITIVITY_CAP: usize = 8;

/// An exactly enumerated discrete distribution.
///
/// `outcomes` holds (value, probability) sorted by value, with equal values
/// merged; probabilities are exact subset counts divided by the total count,
/// emitted as doubles. The mean and variance are accumulated over the raw
/// enumeration, not the merged support.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub outcomes: Vec<(f64, f64)>,
    mean: f64,
    variance: f64,
}

impl ExactDistribution {
    fn from_draws(mut draws: Vec<f64>) -> Self {
        let total = draws.len() as f64;
        let mean = crate::math::compensated_sum(draws.iter().copied()) / total;
        let variance =
            crate::math::compensated_sum(draws.iter().map(|&x| (x - mean) * (x - mean))) / total;
        draws.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
        let mut outcomes: Vec<(f64, u64)> = Vec::new();
        let merge_eps = 1e-9;
        for x in draws {
            match outcomes.last_mut() {
                Some((v, c)) if (x - *v).abs() <= merge_eps * (1.0 + v.abs()) => *c += 1,
                _ => outcomes.push((x, 1)),
            }
        }
        let outcomes = outcomes
            .into_iter()
            .map(|(v, c)| (v, c as f64 / total))
            .collect();
        ExactDistribution {
            outcomes,
            mean,
            variance,
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Probability of an outcome within `tol` of `value`.
    pub fn probability_near(&self, value: f64, tol: f64) -> f64 {
        self.outcomes
            .iter()
            .filter(|(v, _)| (v - value).abs() <= tol)
            .map(|(_, p)| p)
            .sum()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Visit every k-subset of 0..n in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact null distribution of U1: every n1-subset of the modified rank-value
/// multiset is equally likely under exchangeability.
pub fn exact_u1_null(
    n: usize,
    n1: usize,
    q_count: usize,
    psi: &TransformSpec,
) -> Result<ExactDistribution> {
    if n1 > n || q_count > n {
        return Err(Error::InvalidParameter("n1 and Q must not exceed n"));
    }
    let count = binomial(n, n1);
    if count > ENUMERATION_CAP {
        return Err(Error::TooLarge {
            required: count,
            cap: ENUMERATION_CAP,
        });
    }
    let values: Vec<f64> = center_outward_rank_values(n, q_count)
        .into_iter()
        .map(|r| psi.apply(r))
        .collect();
    let mu1 = n1 as f64 / n as f64 * sum_psi(psi, n - q_count);
    let mut draws = Vec::with_capacity(count as usize);
    for_each_combination(n, n1, |subset| {
        let sum: f64 = subset.iter().map(|&i| values[i]).sum();
        draws.push(sum - mu1);
    });
    Ok(ExactDistribution::from_draws(draws))
}

fn u1_of_labels(psi_values: &[f64], labels: &[bool], n1: usize, sum_all: f64) -> f64 {
    let raw: f64 = psi_values
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&v, _)| v)
        .sum();
    raw - n1 as f64 / labels.len() as f64 * sum_all
}

/// Exhaustive global-sensitivity search for U1 over rank configurations.
///
/// A single-observation replacement is fully described by which sorted
/// position the old point vacates, which position the new point occupies,
/// and the new point's group, so maximizing over group labelings and those
/// transitions covers every pair of adjacent datasets of real values.
pub fn exhaustive_u1_sensitivity(
    n1: usize,
    n2: usize,
    q_count: usize,
    psi: &TransformSpec,
) -> Result<f64> {
    let n = n1 + n2;
    if n > SENSITIVITY_CAP {
        return Err(Error::TooLarge {
            required: n as u128,
            cap: SENSITIVITY_CAP as u128,
        });
    }
    if n1 == 0 || n2 == 0 || q_count > n {
        return Err(Error::InvalidParameter("need n1, n2 >= 1 and Q <= n"));
    }
    let psi_values: Vec<f64> = center_outward_rank_values(n, q_count)
        .into_iter()
        .map(|r| psi.apply(r))
        .collect();
    let sum_all = sum_psi(psi, n - q_count);
    let mut worst = 0.0f64;
    for_each_combination(n, n1, |subset| {
        let mut labels = vec![false; n];
        for &i in subset {
            labels[i] = true;
        }
        let base = u1_of_labels(&psi_values, &labels, n1, sum_all);
        for removed in 0..n {
            let mut rest = labels.clone();
            rest.remove(removed);
            for inserted in 0..n {
                for new_group in [true, false] {
                    let mut next = rest.clone();
                    next.insert(inserted, new_group);
                    let n1_next = n1 - usize::from(labels[removed]) + usize::from(new_group);
                    let moved = u1_of_labels(&psi_values, &next, n1_next, sum_all);
                    worst = worst.max((base - moved).abs());
                }
            }
        }
    });
    Ok(worst)
}

/// Midpoints between consecutive order statistics plus one point below and
/// one above: every interleaving position a replacement value can take.
pub fn default_sensitivity_grid(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    sorted.dedup();
    let mut grid = Vec::with_capacity(sorted.len() + 1);
    match (sorted.first(), sorted.last()) {
        (Some(&lo), Some(&hi)) => {
            let pad = (hi - lo).max(1.0);
            grid.push(lo - pad);
            for w in sorted.windows(2) {
                grid.push(0.5 * (w[0] + w[1]));
            }
            grid.push(hi + pad);
        }
        _ => grid.push(0.0),
    }
    grid
}

/// Literal value-level sensitivity search: base datasets are n-subsets of
/// the grid under every group labeling, and one observation is replaced by
/// any other grid value (same group or switched). Exponential in n; meant
/// for cross-checking `exhaustive_u1_sensitivity` on tiny instances.
pub fn exhaustive_u1_sensitivity_on_grid(
    n1: usize,
    n2: usize,
    q_count: usize,
    psi: &TransformSpec,
    grid: &[f64],
) -> Result<f64> {
    let n = n1 + n2;
    if n > SENSITIVITY_CAP {
        return Err(Error::TooLarge {
            required: n as u128,
            cap: SENSITIVITY_CAP as u128,
        });
    }
    let mut points = grid.to_vec();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    points.dedup();
    if points.len() < n {
        return Err(Error::InvalidParameter("grid must contain at least n distinct values"));
    }
    let psi_values: Vec<f64> = center_outward_rank_values(n, q_count)
        .into_iter()
        .map(|r| psi.apply(r))
        .collect();
    let sum_all = sum_psi(psi, n - q_count);
    let u1_of_dataset = |data: &[(f64, bool)], n1_now: usize| -> f64 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| data[a].0.partial_cmp(&data[b].0).unwrap());
        let raw: f64 = order
            .iter()
            .enumerate()
            .filter(|(_, &i)| data[i].1)
            .map(|(pos, _)| psi_values[pos])
            .sum();
        raw - n1_now as f64 / n as f64 * sum_all
    };
    let mut worst = 0.0f64;
    for_each_combination(points.len(), n, |value_idx| {
        let values: Vec<f64> = value_idx.iter().map(|&i| points[i]).collect();
        for_each_combination(n, n1, |subset| {
            let mut data: Vec<(f64, bool)> = values.iter().map(|&v| (v, false)).collect();
            for &i in subset {
                data[i].1 = true;
            }
            let base = u1_of_dataset(&data, n1);
            for replaced in 0..n {
                for &new_value in &points {
                    if data
                        .iter()
                        .enumerate()
                        .any(|(i, &(v, _))| i != replaced && v == new_value)
                    {
                        continue; // would create a tie
                    }
                    for new_group in [true, false] {
                        let mut next = data.clone();
                        next[replaced] = (new_value, new_group);
                        let n1_next =
                            n1 - usize::from(data[replaced].1) + usize::from(new_group);
                        let moved = u1_of_dataset(&next, n1_next);
                        worst = worst.max((base - moved).abs());
                    }
                }
            }
        });
    });
    Ok(worst)
}

/// Exact null distribution of W1 under independent fair signs: all 2^n sign
/// vectors over the modified ranks are equally likely.
pub fn exact_w1_null(n: usize, q_count: usize, psi: &TransformSpec) -> Result<ExactDistribution> {
    if n > 16 {
        return Err(Error::TooLarge {
            required: 1u128.checked_shl(n as u32).unwrap_or(u128::MAX),
            cap: 1 << 16,
        });
    }
    if q_count > n {
        return Err(Error::InvalidParameter("Q must not exceed n"));
    }
    let psi_values: Vec<f64> = (1..=n)
        .map(|r| psi.apply(r.saturating_sub(q_count)))
        .collect();
    let mut draws = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut w = 0.0;
        for (i, &v) in psi_values.iter().enumerate() {
            if mask & (1 << i) != 0 {
                w += v;
            } else {
                w -= v;
            }
        }
        draws.push(w);
    }
    Ok(ExactDistribution::from_draws(draws))
}

/// Exhaustive single-pair-replacement sensitivity for W1: over all sign
/// assignments, a removed rank position, a reinsertion position, and the
/// replacement's sign.
pub fn exhaustive_w1_sensitivity(n: usize, q_count: usize, psi: &TransformSpec) -> Result<f64> {
    if n > SENSITIVITY_CAP {
        return Err(Error::TooLarge {
            required: n as u128,
            cap: SENSITIVITY_CAP as u128,
        });
    }
    if q_count > n {
        return Err(Error::InvalidParameter("Q must not exceed n"));
    }
    let psi_values: Vec<f64> = (1..=n)
        .map(|r| psi.apply(r.saturating_sub(q_count)))
        .collect();
    let w_of = |signs: &[i8]| -> f64 {
        signs
            .iter()
            .zip(&psi_values)
            .map(|(&s, &v)| s as f64 * v)
            .sum()
    };
    let mut worst = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let signs: Vec<i8> = (0..n)
            .map(|i| if mask & (1 << i) != 0 { 1 } else { -1 })
            .collect();
        let base = w_of(&signs);
        for removed in 0..n {
            let mut rest = signs.clone();
            rest.remove(removed);
            for inserted in 0..n {
                for new_sign in [1i8, -1] {
                    let mut next = rest.clone();
                    next.insert(inserted, new_sign);
                    worst = worst.max((base - w_of(&next)).abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn exact_u1_null_four_choose_two() {
        let d = exact_u1_null(4, 2, 0, &TransformSpec::Identity).unwrap();
        let expect = [
            (-2.0, 1.0 / 6.0),
            (-1.0, 1.0 / 6.0),
            (0.0, 2.0 / 6.0),
            (1.0, 1.0 / 6.0),
            (2.0, 1.0 / 6.0),
        ];
        assert_eq!(d.outcomes.len(), expect.len());
        for ((v, p), (ev, ep)) in d.outcomes.iter().zip(expect) {
            assert!((v - ev).abs() < 1e-12);
            assert!((p - ep).abs() < 1e-12);
        }
        assert!(d.mean().abs() < 1e-12);
        assert!((d.variance() - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_u1_null_matches_closed_form_variance() {
        for psi in [TransformSpec::Arctan, TransformSpec::square()] {
            for (n, n1, q) in [(5usize, 2usize, 1usize), (7, 3, 2), (6, 5, 0)] {
                let d = exact_u1_null(n, n1, q, &psi).unwrap();
                let v = stats::null_variance(n1 as f64, (n - n1) as f64, &psi, q);
                assert!(d.mean().abs() < 1e-12);
                assert!((d.variance() - v).abs() <= 1e-9 * v.max(1e-12));
            }
        }
    }

    #[test]
    fn u1_null_antisymmetry_between_groups() {
        let d1 = exact_u1_null(6, 2, 1, &TransformSpec::Log1p).unwrap();
        let d2 = exact_u1_null(6, 4, 1, &TransformSpec::Log1p).unwrap();
        // distribution of U1 for group 2 is the reflection of group 1's
        for ((v1, p1), (v2, p2)) in d1.outcomes.iter().zip(d2.outcomes.iter().rev()) {
            assert!((v1 + v2).abs() < 1e-9);
            assert!((p1 - p2).abs() < 1e-12);
        }
    }

    #[test]
    fn sensitivity_oracle_below_bound_small() {
        let psi = TransformSpec::Identity;
        let got = exhaustive_u1_sensitivity(1, 1, 0, &psi).unwrap();
        assert!(got <= 2.5 + 1e-12, "{got}");
        for (n1, n2, q) in [(2usize, 2usize, 0usize), (2, 3, 1), (3, 2, 2)] {
            for psi in TransformSpec::standard_family() {
                let got = exhaustive_u1_sensitivity(n1, n2, q, &psi).unwrap();
                let bound = stats::sensitivity_bound(&psi, n1 + n2, q).unwrap().gs_star;
                assert!(got <= bound + 1e-12, "{got} > {bound}");
            }
        }
    }

    #[test]
    fn grid_oracle_agrees_with_pattern_oracle() {
        let psi = TransformSpec::Log1p;
        let base = [0.7, -1.1, 2.4, 0.1];
        let grid = default_sensitivity_grid(&base);
        let mut all = base.to_vec();
        all.extend_from_slice(&grid);
        let by_grid = exhaustive_u1_sensitivity_on_grid(2, 2, 1, &psi, &all).unwrap();
        let by_pattern = exhaustive_u1_sensitivity(2, 2, 1, &psi).unwrap();
        assert!((by_grid - by_pattern).abs() < 1e-12, "{by_grid} vs {by_pattern}");
    }

    #[test]
    fn exact_w1_null_small() {
        let d = exact_w1_null(3, 0, &TransformSpec::Identity).unwrap();
        assert!((d.probability_near(6.0, 1e-12) - 0.125).abs() < 1e-12);
        assert!((d.probability_near(-6.0, 1e-12) - 0.125).abs() < 1e-12);
        assert!(d.mean().abs() < 1e-12);
        assert!((d.variance() - 14.0).abs() < 1e-12);
        // symmetric about zero
        for ((v1, p1), (v2, p2)) in d.outcomes.iter().zip(d.outcomes.iter().rev()) {
            assert!((v1 + v2).abs() < 1e-12);
            assert!((p1 - p2).abs() < 1e-12);
        }
    }

    #[test]
    fn w1_sensitivity_oracle_below_bound() {
        for (n, q) in [(4usize, 0usize), (5, 2), (6, 5)] {
            for psi in TransformSpec::standard_family() {
                let got = exhaustive_w1_sensitivity(n, q, &psi).unwrap();
                let bound = stats::w1_sensitivity(&psi, n, q);
                assert!(got <= bound + 1e-12, "{got} > {bound}");
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            exact_u1_null(40, 20, 0, &TransformSpec::Identity),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            exhaustive_u1_sensitivity(5, 5, 0, &TransformSpec::Identity),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            exact_w1_null(20, 0, &TransformSpec::Identity),
            Err(Error::TooLarge { .. })
        ));
    }
}
