//! BCD against exhaustive search on small RIS instances.

use std::time::Instant;

use rissec_core::ao::{scenario_for, AoSettings};
use rissec_core::bcd::{bcd_sweep, exhaustive_phase_search};
use rissec_core::error::Result;
use rissec_core::sca::BeamInstance;
use rissec_core::{PhaseVector, SchemeKind, SystemConfig};

use crate::harness::draw_trial;
use crate::seed::trial_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRecord {
    pub seed: u64,
    pub bcd_rate: f64,
    pub exhaustive_rate: f64,
    pub bcd_us: f64,
    pub exhaustive_us: f64,
}

impl OracleRecord {
    /// `bcd / exhaustive`, 1 when both are zero.
    pub fn ratio(&self) -> f64 {
        if self.exhaustive_rate == 0.0 {
            if self.bcd_rate == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.bcd_rate / self.exhaustive_rate
        }
    }
}

/// System used by the oracle suite: the default one with `n_ris = 3` and
/// `L = 4`, small enough to enumerate.
pub fn oracle_config() -> SystemConfig {
    SystemConfig {
        n_ris: 3,
        phase_levels: 4,
        ..SystemConfig::default()
    }
}

/// One oracle trial: the beamformer is MRT at the trial's random initial
/// phases, then held fixed while BCD (from those phases) and exhaustive
/// search optimize the phases.
pub fn oracle_trial(cfg: &SystemConfig, seed: u64) -> Result<OracleRecord> {
    let input = draw_trial(cfg, seed)?;
    let sc = scenario_for(SchemeKind::Proposed, cfg, &input.ch)?;
    let start = PhaseVector::discrete(&input.initial_levels, cfg.phase_levels)?;
    let gains = sc.gains(&start)?;
    let w = BeamInstance::new(&gains, &sc.q, sc.noise_user, sc.noise_eve, sc.power).mrt();

    let t = Instant::now();
    let bcd = bcd_sweep(&sc, &w, &start, AoSettings::default().max_sweeps)?;
    let bcd_us = t.elapsed().as_secs_f64() * 1e6;
    let t = Instant::now();
    let best = exhaustive_phase_search(&sc, &w, cfg.phase_levels)?;
    let exhaustive_us = t.elapsed().as_secs_f64() * 1e6;

    Ok(OracleRecord {
        seed,
        bcd_rate: sc.evaluate(&bcd.phases, &w)?.secrecy,
        exhaustive_rate: sc.evaluate(&best, &w)?.secrecy,
        bcd_us,
        exhaustive_us,
    })
}

pub fn oracle_suite(cfg: &SystemConfig, master: u64, trials: usize) -> Result<Vec<OracleRecord>> {
    (0..trials as u64)
        .map(|t| oracle_trial(cfg, trial_seed(master, t)))
        .collect()
}
