//! Parameter grids: the Cartesian product of named config axes and seeds.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::config::{ConfigError, ScenarioConfig, ValidatedConfig};

/// One grid dimension: a config key and the values it takes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl Axis {
    pub fn new<K: Into<String>, V: ToString>(key: K, values: impl IntoIterator<Item = V>) -> Self {
        Axis { key: key.into(), values: values.into_iter().map(|v| v.to_string()).collect() }
    }
}

/// One cell of a grid: its coordinates and the config to run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    /// `(key, value)` per axis, in axis order.
    pub params: Vec<(String, String)>,
    pub seed: u64,
    pub config: ValidatedConfig,
}

/// Expands `axes × seeds` over `base`, axes varying slowest-first and seeds fastest.
///
/// Empty `axes` gives one cell per seed; empty `seeds` uses the base seed.
/// Every cell is validated up front, so a bad axis name or value fails the
/// whole grid before anything runs.
pub fn expand(base: &ScenarioConfig, axes: &[Axis], seeds: &[u64]) -> Result<Vec<SweepCell>, ConfigError> {
    let base_seed = [base.rng_seed];
    let seeds = if seeds.is_empty() { &base_seed[..] } else { seeds };
    let mut combos: Vec<Vec<(String, String)>> = alloc::vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(combos.len() * axis.values.len());
        for combo in &combos {
            for v in &axis.values {
                let mut c = combo.clone();
                c.push((axis.key.clone(), v.clone()));
                next.push(c);
            }
        }
        combos = next;
    }
    let mut cells = Vec::with_capacity(combos.len() * seeds.len());
    for params in combos {
        let mut cfg = base.clone();
        for (k, v) in &params {
            cfg.set(k, v)?;
        }
        for &seed in seeds {
            let config = ScenarioConfig { rng_seed: seed, ..cfg.clone() }.validate()?;
            cells.push(SweepCell { params: params.clone(), seed, config });
        }
    }
    Ok(cells)
}
