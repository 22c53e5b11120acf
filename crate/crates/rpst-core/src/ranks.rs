//! Center-outward ranking with percentile modification, signed ranks for
//! paired data, and the classical alternating ranks.
//!
//! The working ranks run from the extremes inward: the most extreme
//! observations receive the largest values and the Q most central
//! observations receive rank 0, so a scale difference between groups moves
//! transformed rank sums apart while central observations carry no weight.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::privacy::open_unit_uniform;

/// How positive rank values alternate between the low and high extremes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alternation {
    /// One point per side, starting at the lowest observation.
    #[default]
    OneAtATime,
    /// One point at the lowest observation, then pairs per side starting high.
    Pairwise,
}

/// Percentile modification given either as a proportion q or a direct count Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModificationSpec {
    /// Zero the floor(n*q) most central ranks; requires 0 <= q < 1.
    Proportion(f64),
    /// Zero exactly this many central ranks.
    Count(usize),
}

impl ModificationSpec {
    /// Resolve to the number of zeroed central ranks for a sample of size n.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        match *self {
            ModificationSpec::Proportion(q) => {
                if !(0.0..1.0).contains(&q) {
                    return Err(Error::InvalidParameter("q must lie in [0,1)"));
                }
                let x = n as f64 * q;
                // floor(n*q), tolerating float representation of q just
                // below an integer boundary (e.g. 10 * 0.3).
                let r = libm::round(x);
                let q_count = if (x - r).abs() < 1e-9 * (n as f64).max(1.0) {
                    r as usize
                } else {
                    libm::floor(x) as usize
                };
                Ok(q_count.min(n))
            }
            ModificationSpec::Count(q_count) => {
                if q_count > n {
                    return Err(Error::QTooLarge { q_count, n });
                }
                Ok(q_count)
            }
        }
    }

    /// The proportion, when that is how the modification was given.
    pub fn proportion(&self) -> Option<f64> {
        match *self {
            ModificationSpec::Proportion(q) => Some(q),
            ModificationSpec::Count(_) => None,
        }
    }
}

/// A combined two-sample dataset with per-observation group flags and ranks.
///
/// `values` holds group 1 followed by group 2 in input order; `ranks[i]` is
/// the modified center-outward rank of `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSample {
    pub values: Vec<f64>,
    pub group_flags: Vec<bool>,
    pub ranks: Vec<usize>,
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub q_count: usize,
}

/// Paired data reduced to absolute differences, signs and (modified) ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedRankSample {
    pub abs_diffs: Vec<f64>,
    pub signs: Vec<i8>,
    /// Linear ranks of the absolute differences, a permutation of 1..=n.
    pub ranks: Vec<usize>,
    /// (rank - Q) clamped at zero.
    pub modified_ranks: Vec<usize>,
    pub n: usize,
    pub q_count: usize,
}

impl Alternation {
    /// Rank values by sorted position (lowest observation first).
    ///
    /// Values n-Q, n-Q-1, ..., 1 are handed out from the extremes inward
    /// according to the scheme; the Q central positions are left at 0.
    pub fn rank_values(self, n: usize, q_count: usize) -> Vec<usize> {
        debug_assert!(q_count <= n);
        let mut vals = vec![0usize; n];
        if n == 0 || q_count >= n {
            return vals;
        }
        let mut next = n - q_count;
        let mut lo: isize = 0;
        let mut hi: isize = n as isize - 1;
        match self {
            Alternation::OneAtATime => {
                let mut low_side = true;
                while next > 0 && lo <= hi {
                    if low_side {
                        vals[lo as usize] = next;
                        lo += 1;
                    } else {
                        vals[hi as usize] = next;
                        hi -= 1;
                    }
                    low_side = !low_side;
                    next -= 1;
                }
            }
            Alternation::Pairwise => {
                vals[lo as usize] = next;
                lo += 1;
                next -= 1;
                let mut high_side = true;
                while next > 0 && lo <= hi {
                    for _ in 0..2 {
                        if next == 0 || lo > hi {
                            break;
                        }
                        if high_side {
                            vals[hi as usize] = next;
                            hi -= 1;
                        } else {
                            vals[lo as usize] = next;
                            lo += 1;
                        }
                        next -= 1;
                    }
                    high_side = !high_side;
                }
            }
        }
        vals
    }
}

/// Center-outward rank values for the default one-at-a-time alternation.
pub fn center_outward_rank_values(n: usize, q_count: usize) -> Vec<usize> {
    Alternation::OneAtATime.rank_values(n, q_count)
}

/// Classical Siegel-Tukey rank values by sorted position: rank 1 at the
/// lowest point, 2-3 at the two highest, 4-5 at the next two lowest, and so
/// on, alternating pairs until all of 1..=n are assigned.
pub fn classic_siegel_tukey_ranks(n: usize) -> Vec<usize> {
    let mut vals = vec![0usize; n];
    if n == 0 {
        return vals;
    }
    vals[0] = 1;
    let mut next = 2usize;
    let mut lo: isize = 1;
    let mut hi: isize = n as isize - 1;
    let mut high_side = true;
    while next <= n && lo <= hi {
        for _ in 0..2 {
            if next > n || lo > hi {
                break;
            }
            if high_side {
                vals[hi as usize] = next;
                hi -= 1;
            } else {
                vals[lo as usize] = next;
                lo += 1;
            }
            next += 1;
        }
        high_side = !high_side;
    }
    vals
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("observations must be finite"));
    }
    Ok(())
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    s
}

fn has_ties(sorted: &[f64]) -> bool {
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Smallest gap between distinct consecutive order statistics, or infinity
/// when no two values differ.
fn min_positive_gap(sorted: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for w in sorted.windows(2) {
        let d = w[1] - w[0];
        if d > 0.0 && d < gap {
            gap = d;
        }
    }
    gap
}

fn validate_jitter(scale: f64, sorted: &[f64]) -> Result<()> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidParameter("jitter scale must be finite and > 0"));
    }
    let max_allowed = min_positive_gap(sorted) / 2.0;
    if scale >= max_allowed {
        return Err(Error::JitterTooLarge { scale, max_allowed });
    }
    Ok(())
}

fn jittered<R: RngCore + ?Sized>(values: &[f64], scale: f64, rng: &mut R) -> Vec<f64> {
    values
        .iter()
        .map(|v| v + scale * (2.0 * open_unit_uniform(rng) - 1.0))
        .collect()
}

/// Order of indices when the values are sorted ascending. Values must be
/// pairwise distinct.
fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    idx
}

fn rank_distinct(
    combined: &[f64],
    n1: usize,
    q_count: usize,
    alternation: Alternation,
) -> RankedSample {
    let n = combined.len();
    let order = ascending_order(combined);
    let rank_values = alternation.rank_values(n, q_count);
    let mut ranks = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = rank_values[pos];
    }
    let mut group_flags = vec![true; n];
    for flag in group_flags.iter_mut().skip(n1) {
        *flag = false;
    }
    RankedSample {
        values: combined.to_vec(),
        group_flags,
        ranks,
        n,
        n1,
        n2: n - n1,
        q_count,
    }
}

/// Rank a two-sample dataset. Fails with `TiesWithoutJitter` on ties.
pub fn rank_data(
    group1: &[f64],
    group2: &[f64],
    modification: &ModificationSpec,
    alternation: Alternation,
) -> Result<RankedSample> {
    if group1.is_empty() || group2.is_empty() {
        return Err(Error::InvalidParameter("both groups must be non-empty"));
    }
    check_finite(group1)?;
    check_finite(group2)?;
    let mut combined = Vec::with_capacity(group1.len() + group2.len());
    combined.extend_from_slice(group1);
    combined.extend_from_slice(group2);
    let q_count = modification.resolve(combined.len())?;
    if has_ties(&sorted_copy(&combined)) {
        return Err(Error::TiesWithoutJitter);
    }
    Ok(rank_distinct(&combined, group1.len(), q_count, alternation))
}

/// Rank a two-sample dataset, breaking ties with uniform jitter on (-scale,
/// scale). The scale must stay below half the smallest gap between distinct
/// values so the order of distinct observations is preserved.
pub fn rank_data_with_jitter<R: RngCore + ?Sized>(
    group1: &[f64],
    group2: &[f64],
    modification: &ModificationSpec,
    alternation: Alternation,
    scale: f64,
    rng: &mut R,
) -> Result<RankedSample> {
    if group1.is_empty() || group2.is_empty() {
        return Err(Error::InvalidParameter("both groups must be non-empty"));
    }
    check_finite(group1)?;
    check_finite(group2)?;
    let mut combined = Vec::with_capacity(group1.len() + group2.len());
    combined.extend_from_slice(group1);
    combined.extend_from_slice(group2);
    let q_count = modification.resolve(combined.len())?;
    let sorted = sorted_copy(&combined);
    if !has_ties(&sorted) {
        return Ok(rank_distinct(&combined, group1.len(), q_count, alternation));
    }
    validate_jitter(scale, &sorted)?;
    // Exact ties after jitter have probability zero; retry a few times in
    // case the float draw collides anyway.
    for _ in 0..16 {
        let shaken = jittered(&combined, scale, rng);
        if !has_ties(&sorted_copy(&shaken)) {
            return Ok(rank_distinct(&shaken, group1.len(), q_count, alternation));
        }
    }
    Err(Error::TiesWithoutJitter)
}

fn signed_ranks_from_diffs(diffs: &[f64], q_count: usize) -> SignedRankSample {
    let n = diffs.len();
    let abs_diffs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let signs: Vec<i8> = diffs.iter().map(|&d| if d > 0.0 { 1 } else { -1 }).collect();
    let order = ascending_order(&abs_diffs);
    let mut ranks = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    let modified_ranks = ranks.iter().map(|&r| r.saturating_sub(q_count)).collect();
    SignedRankSample {
        abs_diffs,
        signs,
        ranks,
        modified_ranks,
        n,
        q_count,
    }
}

fn signed_rank_ties(diffs: &[f64]) -> bool {
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    has_ties(&sorted_copy(&abs))
}

/// Signed ranks of paired data. Fails on zero differences or tied absolute
/// differences when no jitter is configured.
pub fn signed_rank_data(
    pairs: &[(f64, f64)],
    modification: &ModificationSpec,
) -> Result<SignedRankSample> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("at least one pair is required"));
    }
    let diffs: Vec<f64> = pairs.iter().map(|&(x, y)| y - x).collect();
    check_finite(&diffs)?;
    let q_count = modification.resolve(diffs.len())?;
    if diffs.iter().any(|&d| d == 0.0) {
        return Err(Error::ZeroDifference);
    }
    if signed_rank_ties(&diffs) {
        return Err(Error::TiesWithoutJitter);
    }
    Ok(signed_ranks_from_diffs(&diffs, q_count))
}

/// Signed ranks of paired data with uniform jitter applied to the
/// differences to break zero differences and ties.
pub fn signed_rank_data_with_jitter<R: RngCore + ?Sized>(
    pairs: &[(f64, f64)],
    modification: &ModificationSpec,
    scale: f64,
    rng: &mut R,
) -> Result<SignedRankSample> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("at least one pair is required"));
    }
    let diffs: Vec<f64> = pairs.iter().map(|&(x, y)| y - x).collect();
    check_finite(&diffs)?;
    let q_count = modification.resolve(diffs.len())?;
    let zero_present = diffs.iter().any(|&d| d == 0.0);
    if !zero_present && !signed_rank_ties(&diffs) {
        return Ok(signed_ranks_from_diffs(&diffs, q_count));
    }
    // Gap validation over the distinct absolute differences together with
    // zero, so a jittered zero difference cannot overtake the smallest
    // nonzero one.
    let mut abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    abs.push(0.0);
    validate_jitter(scale, &sorted_copy(&abs))?;
    for _ in 0..16 {
        let shaken: Vec<f64> = diffs
            .iter()
            .map(|d| d + scale * (2.0 * open_unit_uniform(rng) - 1.0))
            .collect();
        if shaken.iter().all(|&d| d != 0.0) && !signed_rank_ties(&shaken) {
            return Ok(signed_ranks_from_diffs(&shaken, q_count));
        }
    }
    Err(Error::TiesWithoutJitter)
}
