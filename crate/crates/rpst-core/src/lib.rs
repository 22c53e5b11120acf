//! Differentially private nonparametric two-sample scale testing and paired
//! signed-rank testing built on rank-transformed, percentile-modified
//! center-outward ranks, together with exact brute-force oracles for
//! validating every closed form.
//!
//! The pooled sample is ranked from the extremes inward, the Q most central
//! ranks are zeroed, a nonnegative increasing transformation is applied, and
//! the group-1 sum is privatized with Laplace noise calibrated to a global
//! sensitivity bound. Group sizes enter the reference distribution only
//! through a deliberately downward-biased private disparity estimate, so
//! plugging them in cannot inflate the type I error beyond the leakage
//! probability.
//!
//! The crate is `no_std`-compatible (`default-features = false`); all float
//! transcendentals go through `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod hypothesis;
pub mod math;
pub mod oracle;
pub mod privacy;
pub mod ranks;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};
pub use hypothesis::{
    classic_siegel_tukey, half_normal_critical, rpsr_test, rpst_test, ClassicTestResult,
    PrivateTestResult, TestOptions,
};
pub use privacy::{GroupSizeEstimate, PrivacyBudget};
pub use ranks::{Alternation, ModificationSpec, RankedSample, SignedRankSample};
pub use transforms::TransformSpec;
