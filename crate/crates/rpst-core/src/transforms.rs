//! Rank transformations and scalar summaries derived from them.
//!
//! A transformation is applied to the modified center-outward ranks before
//! summing. Every member of the family is nonnegative, strictly increasing
//! on the nonnegative half-line and fixes psi(0) = 0, so zeroed central
//! ranks contribute nothing to a transformed rank sum.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// A rank transformation psi from the supported family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformSpec {
    /// psi(r) = atan(r)
    Arctan,
    /// psi(r) = ln(r + 1)
    Log1p,
    /// psi(r) = r
    Identity,
    /// psi(r) = r^k for some k > 0
    Power(f64),
}

impl TransformSpec {
    pub fn arctan() -> Self {
        TransformSpec::Arctan
    }

    pub fn log1p() -> Self {
        TransformSpec::Log1p
    }

    pub fn identity() -> Self {
        TransformSpec::Identity
    }

    pub fn sqrt() -> Self {
        TransformSpec::Power(0.5)
    }

    pub fn square() -> Self {
        TransformSpec::Power(2.0)
    }

    /// General power transform; `k` must be finite and positive.
    pub fn power(k: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidParameter("power exponent must be finite and > 0"));
        }
        Ok(TransformSpec::Power(k))
    }

    /// The five transforms studied in the simulation sweeps.
    pub fn standard_family() -> [TransformSpec; 5] {
        [
            TransformSpec::Arctan,
            TransformSpec::Log1p,
            TransformSpec::sqrt(),
            TransformSpec::Identity,
            TransformSpec::square(),
        ]
    }

    /// Evaluate psi at a nonnegative integer rank. psi(0) is exactly 0.
    pub fn apply(&self, r: usize) -> f64 {
        let x = r as f64;
        match *self {
            TransformSpec::Arctan => math::atan(x),
            TransformSpec::Log1p => math::log1p(x),
            TransformSpec::Identity => x,
            TransformSpec::Power(k) => {
                if k == 2.0 {
                    x * x
                } else if k == 0.5 {
                    math::sqrt(x)
                } else {
                    math::pow(x, k)
                }
            }
        }
    }

    /// Canonical name as accepted by CLI and sweep configs.
    pub fn name(&self) -> String {
        use alloc::format;
        match *self {
            TransformSpec::Arctan => String::from("arctan"),
            TransformSpec::Log1p => String::from("log1p"),
            TransformSpec::Identity => String::from("identity"),
            TransformSpec::Power(k) if k == 0.5 => String::from("sqrt"),
            TransformSpec::Power(k) if k == 2.0 => String::from("square"),
            TransformSpec::Power(k) => format!("power:{k}"),
        }
    }

    /// Parse a transform name: arctan, log1p, sqrt, identity, square, power:<k>.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "arctan" => Ok(TransformSpec::Arctan),
            "log1p" => Ok(TransformSpec::Log1p),
            "sqrt" => Ok(TransformSpec::Power(0.5)),
            "identity" => Ok(TransformSpec::Identity),
            "square" => Ok(TransformSpec::Power(2.0)),
            other => {
                if let Some(k) = other.strip_prefix("power:") {
                    let k: f64 = k
                        .parse()
                        .map_err(|_| Error::InvalidParameter("unparseable power exponent"))?;
                    TransformSpec::power(k)
                } else {
                    Err(Error::InvalidParameter("unknown transform name"))
                }
            }
        }
    }

    /// Check psi(0) = 0, nonnegativity and strict monotonicity on 0..=n.
    pub fn validate_on_grid(&self, n: usize) -> Result<()> {
        if self.apply(0) != 0.0 {
            return Err(Error::InvalidParameter("psi(0) must be 0"));
        }
        let mut prev = 0.0;
        for r in 1..=n {
            let v = self.apply(r);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter("psi must be finite and nonnegative"));
            }
            if v <= prev {
                return Err(Error::InvalidParameter("psi must be strictly increasing"));
            }
            prev = v;
        }
        Ok(())
    }
}

impl core::fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl core::str::FromStr for TransformSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransformSpec::parse(s)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for TransformSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for TransformSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <&str as serde::Deserialize>::deserialize(d)?;
        TransformSpec::parse(s).map_err(serde::de::Error::custom)
    }
}

/// Compensated sum of psi(1), ..., psi(m).
pub fn sum_psi(psi: &TransformSpec, m: usize) -> f64 {
    math::compensated_sum((1..=m).map(|i| psi.apply(i)))
}

/// Compensated sum of psi(1)^2, ..., psi(m)^2.
pub fn sum_psi_sq(psi: &TransformSpec, m: usize) -> f64 {
    math::compensated_sum((1..=m).map(|i| {
        let v = psi.apply(i);
        v * v
    }))
}

/// psi-bar_Q = n^-1 sum_{i=1}^{n-Q} psi(i).
pub fn psi_bar_q(psi: &TransformSpec, n: usize, q_count: usize) -> f64 {
    debug_assert!(q_count <= n);
    sum_psi(psi, n - q_count) / n as f64
}

/// Moment-ratio diagnostic mu_r / mu_2^(r/2) of psi(1), ..., psi(n-Q).
///
/// Central moments are taken over the n-Q retained values with divisor n-Q.
/// Finite-sample counterpart of the normality condition on psi; bounded
/// ratios across n indicate the normal reference is trustworthy.
pub fn condition_ratio(psi: &TransformSpec, n: usize, q_count: usize, r: u32) -> Result<f64> {
    if r <= 2 {
        return Err(Error::InvalidParameter("moment order r must exceed 2"));
    }
    if n < q_count || n - q_count < 2 {
        return Err(Error::QTooLarge { q_count, n });
    }
    let m = n - q_count;
    let values: Vec<f64> = (1..=m).map(|i| psi.apply(i)).collect();
    let mean = math::compensated_sum(values.iter().copied()) / m as f64;
    let mu_2 =
        math::compensated_sum(values.iter().map(|v| math::int_pow(v - mean, 2))) / m as f64;
    if mu_2 <= 0.0 {
        return Err(Error::DegenerateSequence);
    }
    let mu_r =
        math::compensated_sum(values.iter().map(|v| math::int_pow(v - mean, r))) / m as f64;
    Ok(mu_r / math::pow(mu_2, r as f64 / 2.0))
}
