//! Sweep configuration: a flat TOML table whose `[grid]` section expands as
//! a Cartesian product.
//!
//! Every `[grid]` key accepts a scalar or a list; scalars broadcast. Cells
//! are ordered by nested loops over family, theta, n, n1, q, psi, eps (last
//! key fastest), and each cell's stream seed is derived from the master seed
//! and the cell index, so results do not depend on worker count.

use serde::Deserialize;

use rpst_core::transforms::TransformSpec;
use rpst_core::{Error, Result};

use crate::sim::{Family, SimConfig, TestKind};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }
}

fn default_family() -> OneOrMany<String> {
    OneOrMany::One("normal".to_string())
}

fn default_theta() -> OneOrMany<f64> {
    OneOrMany::One(1.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_family")]
    pub family: OneOrMany<String>,
    #[serde(default = "default_theta")]
    pub theta: OneOrMany<f64>,
    pub n: OneOrMany<usize>,
    /// Defaults to n/2 per cell when omitted.
    pub n1: Option<OneOrMany<usize>>,
    pub q: OneOrMany<f64>,
    pub psi: OneOrMany<String>,
    pub eps: OneOrMany<f64>,
}

fn default_reps() -> usize {
    500
}

fn default_alpha() -> f64 {
    0.05
}

fn default_delta() -> f64 {
    1e-6
}

fn default_split() -> f64 {
    rpst_core::privacy::DEFAULT_SPLIT
}

fn default_rho() -> f64 {
    0.5
}

fn default_lomax_shape() -> f64 {
    2.5
}

fn default_t_dof() -> f64 {
    3.0
}

fn default_test() -> TestKind {
    TestKind::Rpst
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default = "default_test")]
    pub test: TestKind,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_split")]
    pub split: f64,
    pub seed: Option<u64>,
    #[serde(default = "default_rho")]
    pub copula_rho: f64,
    #[serde(default = "default_lomax_shape")]
    pub lomax_shape: f64,
    #[serde(default = "default_t_dof")]
    pub t_dof: f64,
    pub grid: GridSection,
}

impl SweepFile {
    pub fn parse(text: &str) -> std::result::Result<SweepFile, toml::de::Error> {
        toml::from_str(text)
    }
}

/// SplitMix64 step, used to derive independent per-cell seeds.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seed for cell `index` under `master`.
pub fn cell_seed(master: u64, index: u64) -> u64 {
    let mut state = master ^ index.wrapping_mul(0xa0761d6478bd642f);
    splitmix64(&mut state)
}

/// Expand the Cartesian grid into concrete cells.
pub fn expand(file: &SweepFile, master_seed: u64) -> Result<Vec<SimConfig>> {
    let families = file.family_values()?;
    let thetas = file.grid.theta.values();
    let ns = file.grid.n.values();
    let n1s = file.grid.n1.as_ref().map(|v| v.values());
    let qs = file.grid.q.values();
    let psis: Vec<TransformSpec> = file
        .grid
        .psi
        .values()
        .iter()
        .map(|s| TransformSpec::parse(s))
        .collect::<Result<_>>()?;
    let epss = file.grid.eps.values();

    let mut cells = Vec::new();
    let mut index = 0u64;
    for &family in &families {
        for &theta in &thetas {
            for &n in &ns {
                let n1_choices = match &n1s {
                    Some(values) => values.clone(),
                    None => vec![n / 2],
                };
                for &n1 in &n1_choices {
                    for &q in &qs {
                        for &psi in &psis {
                            for &eps in &epss {
                                cells.push(SimConfig {
                                    test_kind: file.test,
                                    family,
                                    theta,
                                    n,
                                    n1,
                                    q,
                                    psi,
                                    eps,
                                    split: file.split,
                                    delta: file.delta,
                                    alpha: file.alpha,
                                    reps: file.reps,
                                    seed: cell_seed(master_seed, index),
                                    copula_rho: file.copula_rho,
                                });
                                index += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty"));
    }
    Ok(cells)
}

impl SweepFile {
    fn family_values(&self) -> Result<Vec<Family>> {
        self.grid
            .family
            .values()
            .iter()
            .map(|name| Family::parse(name, self.lomax_shape, self.t_dof))
            .collect()
    }
}
