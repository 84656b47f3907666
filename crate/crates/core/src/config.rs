//! System parameters and their validation.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Node positions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub ap_pos: [f64; 3],
    pub ris_pos: [f64; 3],
    pub user_pos: [f64; 3],
    pub eve_pos: [f64; 3],
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            ap_pos: [0.0, 0.0, 0.0],
            ris_pos: [0.0, 60.0, 20.0],
            user_pos: [5.0, 60.0, 0.0],
            eve_pos: [5.0, 80.0, 0.0],
        }
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::sqrt(d)
}

impl Geometry {
    pub fn ap_to_ris(&self) -> f64 {
        distance(self.ap_pos, self.ris_pos)
    }

    pub fn ris_to_user(&self) -> f64 {
        distance(self.ris_pos, self.user_pos)
    }

    pub fn ris_to_eve(&self) -> f64 {
        distance(self.ris_pos, self.eve_pos)
    }

    pub fn ap_to_user(&self) -> f64 {
        distance(self.ap_pos, self.user_pos)
    }

    pub fn ap_to_eve(&self) -> f64 {
        distance(self.ap_pos, self.eve_pos)
    }
}

/// All scalar parameters of one simulated system.
///
/// Field names double as the JSON keys of the configuration file; unknown
/// keys are rejected and missing keys take their default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// AP antennas.
    pub n_tx: usize,
    /// RIS elements.
    pub n_ris: usize,
    /// RF chains.
    pub n_rf: usize,
    /// DAC resolution in bits.
    pub dac_bits: u32,
    /// Number of discrete phase levels of each RIS element.
    pub phase_levels: u32,
    /// Maximum transmit power in watts. The default (120 dBm) is far above
    /// any real AP; with the distance-based losses below, the cascaded
    /// AP→RIS→user link loses about 235 dB, and this is the budget at which
    /// that link reaches a usable SNR.
    pub power_watts: f64,
    pub noise_user_dbm: f64,
    pub noise_eve_dbm: f64,
    /// Standard deviation of the real Gaussian shadowing term, in dB.
    pub shadowing_std_db: f64,
    /// Paths of the AP-to-RIS channel.
    pub n_paths_g: usize,
    /// Paths of each RIS-to-receiver channel.
    pub n_paths_h: usize,
    /// Extra loss of the blocked direct AP-to-receiver links, used only by
    /// the scheme without a RIS. The default, 111 dB, is the excess loss of
    /// the cascaded link over the direct one for the default geometry, so
    /// the direct path is no stronger than the RIS path in large-scale
    /// terms.
    pub direct_blockage_db: f64,
    pub geometry: Geometry,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_tx: 64,
            n_ris: 16,
            n_rf: 8,
            dac_bits: 1,
            phase_levels: 4,
            power_watts: 1e9,
            noise_user_dbm: -110.0,
            noise_eve_dbm: -110.0,
            shadowing_std_db: 1.0,
            n_paths_g: 3,
            n_paths_h: 3,
            direct_blockage_db: 111.0,
            geometry: Geometry::default(),
            seed: 0,
        }
    }
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    libm::pow(10.0, (dbm - 30.0) / 10.0)
}

impl SystemConfig {
    /// Phase step of the discrete set, `2π / L`.
    pub fn phase_step(&self) -> f64 {
        2.0 * PI / self.phase_levels as f64
    }

    pub fn noise_user_watts(&self) -> f64 {
        dbm_to_watts(self.noise_user_dbm)
    }

    pub fn noise_eve_watts(&self) -> f64 {
        dbm_to_watts(self.noise_eve_dbm)
    }

    /// Every violated invariant, in field order. Empty means valid.
    pub fn validate(&self) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        if self.n_tx == 0 {
            errs.push(ConfigError::ZeroCount("n_tx"));
        }
        if self.n_ris == 0 {
            errs.push(ConfigError::ZeroCount("n_ris"));
        }
        if self.n_rf == 0 {
            errs.push(ConfigError::ZeroCount("n_rf"));
        }
        if self.n_rf > self.n_tx {
            errs.push(ConfigError::RfExceedsTx {
                n_rf: self.n_rf,
                n_tx: self.n_tx,
            });
        }
        if self.dac_bits == 0 {
            errs.push(ConfigError::DacBits);
        }
        if self.phase_levels < 2 {
            errs.push(ConfigError::PhaseLevels(self.phase_levels));
        }
        if !(self.power_watts.is_finite() && self.power_watts > 0.0) {
            errs.push(ConfigError::Power(self.power_watts));
        }
        if !self.noise_user_dbm.is_finite() {
            errs.push(ConfigError::NotFinite("noise_user_dbm"));
        }
        if !self.noise_eve_dbm.is_finite() {
            errs.push(ConfigError::NotFinite("noise_eve_dbm"));
        }
        if !(self.shadowing_std_db.is_finite() && self.shadowing_std_db >= 0.0) {
            errs.push(ConfigError::Shadowing(self.shadowing_std_db));
        }
        if self.n_paths_g == 0 {
            errs.push(ConfigError::ZeroCount("n_paths_g"));
        }
        if self.n_paths_h == 0 {
            errs.push(ConfigError::ZeroCount("n_paths_h"));
        }
        if !self.direct_blockage_db.is_finite() {
            errs.push(ConfigError::NotFinite("direct_blockage_db"));
        }
        let g = &self.geometry;
        let all = [g.ap_pos, g.ris_pos, g.user_pos, g.eve_pos];
        if all.iter().flatten().any(|c| !c.is_finite()) {
            errs.push(ConfigError::NotFinite("geometry"));
        } else {
            let links = [
                ("ap-ris", g.ap_to_ris()),
                ("ris-user", g.ris_to_user()),
                ("ris-eve", g.ris_to_eve()),
                ("ap-user", g.ap_to_user()),
                ("ap-eve", g.ap_to_eve()),
            ];
            for (name, d) in links {
                if d <= 0.0 {
                    errs.push(ConfigError::Colocated(name));
                }
            }
        }
        errs
    }
}

/// Convenience wrapper returning `Ok(())` or the full list of problems.
pub fn validate_config(cfg: &SystemConfig) -> Result<(), Vec<ConfigError>> {
    let errs = cfg.validate();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    ZeroCount(&'static str),
    RfExceedsTx { n_rf: usize, n_tx: usize },
    DacBits,
    PhaseLevels(u32),
    Power(f64),
    NotFinite(&'static str),
    Shadowing(f64),
    Colocated(&'static str),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::ZeroCount(name) => write!(f, "{name} must be ≥ 1"),
            ConfigError::RfExceedsTx { n_rf, n_tx } => {
                write!(f, "n_rf exceeds n_tx ({n_rf} > {n_tx})")
            }
            ConfigError::DacBits => write!(f, "dac_bits must be ≥ 1"),
            ConfigError::PhaseLevels(l) => write!(f, "L must be ≥ 2 (got {l})"),
            ConfigError::Power(p) => write!(f, "power_watts must be finite and > 0 (got {p})"),
            ConfigError::NotFinite(name) => write!(f, "{name} must be finite"),
            ConfigError::Shadowing(s) => {
                write!(f, "shadowing_std_db must be finite and ≥ 0 (got {s})")
            }
            ConfigError::Colocated(link) => write!(f, "{link} distance must be > 0"),
        }
    }
}
