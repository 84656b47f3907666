use std::fmt;
use std::path::PathBuf;

use rissec_core::{SchemeKind, SystemConfig};
use serde::{Deserialize, Serialize};

/// The one parameter a campaign varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    #[default]
    None,
    NRis(Vec<usize>),
    DacBits(Vec<u32>),
    Power(Vec<f64>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::None => 1,
            Sweep::NRis(v) => v.len(),
            Sweep::DacBits(v) => v.len(),
            Sweep::Power(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The swept value at `idx` as written to the CSV (0 without a sweep).
    pub fn value(&self, idx: usize) -> f64 {
        match self {
            Sweep::None => 0.0,
            Sweep::NRis(v) => v[idx] as f64,
            Sweep::DacBits(v) => v[idx] as f64,
            Sweep::Power(v) => v[idx],
        }
    }

    /// `base` with the swept parameter set to point `idx`.
    pub fn apply(&self, base: &SystemConfig, idx: usize) -> SystemConfig {
        let mut cfg = base.clone();
        match self {
            Sweep::None => {}
            Sweep::NRis(v) => cfg.n_ris = v[idx],
            Sweep::DacBits(v) => cfg.dac_bits = v[idx],
            Sweep::Power(v) => cfg.power_watts = v[idx],
        }
        cfg
    }

    fn increasing(&self) -> bool {
        let values: Vec<f64> = (0..self.len()).map(|i| self.value(i)).collect();
        values.windows(2).all(|w| w[0] < w[1])
    }
}

fn default_trials() -> usize {
    100
}

fn default_schemes() -> Vec<SchemeKind> {
    vec![SchemeKind::Proposed]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub base: SystemConfig,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<SchemeKind>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            base: SystemConfig::default(),
            sweep: Sweep::None,
            n_trials: default_trials(),
            schemes: default_schemes(),
            output_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentError(pub Vec<String>);

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join("; "))
    }
}

impl std::error::Error for ExperimentError {}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut errs = Vec::new();
        if self.n_trials == 0 {
            errs.push("n_trials must be ≥ 1".to_string());
        }
        if self.schemes.is_empty() {
            errs.push("at least one scheme is required".to_string());
        }
        if self.sweep.is_empty() {
            errs.push("sweep list is empty".to_string());
        } else if !self.sweep.increasing() {
            errs.push("sweep values must be strictly increasing".to_string());
        }
        for i in 0..self.sweep.len() {
            for e in self.sweep.apply(&self.base, i).validate() {
                let msg = format!("sweep point {}: {e}", self.sweep.value(i));
                if !errs.contains(&msg) {
                    errs.push(msg);
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError(errs))
        }
    }
}
