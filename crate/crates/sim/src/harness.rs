use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rissec_core::ao::{random_phase_levels, AoSettings, AoWarning, TrialInput};
use rissec_core::sca::ScaWarning;
use rissec_core::{gen_channels, gen_direct_channels, run_scheme, secrecy_rate, SchemeKind, SystemConfig};

use crate::experiment::ExperimentConfig;
use crate::seed::trial_seed;

/// One scheme on one trial at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub scheme: SchemeKind,
    pub sweep_value: f64,
    pub secrecy_rate: f64,
    pub user_rate: f64,
    pub eve_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Wall time of the scheme run. Not part of the main CSV, which must
    /// be reproducible byte for byte.
    pub wall_ms: f64,
    /// `;`-separated warning tags, empty when clean.
    pub warnings: String,
    /// Canonical position: (sweep index, scheme index, trial index).
    pub key: (usize, usize, usize),
}

/// Channel draw, direct links and initial phases for one trial, all from
/// one ChaCha8 stream seeded with `seed`, in that order.
pub fn draw_trial(cfg: &SystemConfig, seed: u64) -> rissec_core::error::Result<TrialInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = gen_channels(cfg, &mut rng)?;
    let direct = gen_direct_channels(cfg, &mut rng)?;
    let initial_levels = random_phase_levels(cfg.n_ris, cfg.phase_levels, &mut rng);
    Ok(TrialInput {
        ch,
        direct,
        initial_levels,
    })
}

pub fn warning_tag(w: &AoWarning) -> &'static str {
    match w {
        AoWarning::Sca(ScaWarning::SolverIterationLimit) => "sca-solver-iteration-limit",
        AoWarning::Sca(ScaWarning::SolverFailure) => "sca-solver-failure",
        AoWarning::Sca(ScaWarning::RejectedStep) => "sca-rejected-step",
        AoWarning::Sca(ScaWarning::NotConverged) => "sca-not-converged",
        AoWarning::Sca(ScaWarning::ZeroUserChannel) => "sca-zero-user-channel",
        AoWarning::ZeroChannel => "zero-user-channel",
        AoWarning::NotConverged => "ao-not-converged",
    }
}

fn run_one(exp: &ExperimentConfig, key: (usize, usize, usize)) -> TrialRecord {
    let (si, ki, t) = key;
    let cfg = exp.sweep.apply(&exp.base, si);
    let scheme = exp.schemes[ki];
    let seed = trial_seed(exp.base.seed, t as u64);
    let start = Instant::now();
    let outcome = draw_trial(&cfg, seed).and_then(|input| run_scheme(scheme, &cfg, &input, &AoSettings::default()));
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let base = TrialRecord {
        seed,
        scheme,
        sweep_value: exp.sweep.value(si),
        secrecy_rate: f64::NAN,
        user_rate: f64::NAN,
        eve_rate: f64::NAN,
        iterations: 0,
        converged: false,
        wall_ms,
        warnings: String::new(),
        key,
    };
    match outcome {
        Ok(res) => TrialRecord {
            secrecy_rate: res.rates.secrecy,
            user_rate: res.rates.user,
            eve_rate: res.rates.eve,
            iterations: res.iterations,
            converged: res.converged,
            warnings: res.warnings.iter().map(warning_tag).collect::<Vec<_>>().join(";"),
            ..base
        },
        // a failed trial is recorded, never fatal to the campaign
        Err(e) => TrialRecord {
            warnings: format!("error: {e}").replace([',', '\n'], " "),
            ..base
        },
    }
}

/// Runs every (sweep point, scheme, trial) of `exp`. Records come back in
/// canonical order regardless of scheduling, and `R_s` is re-derived from
/// `R` and `R_e` as a consistency check. The master seed is `exp.base.seed`.
pub fn run_monte_carlo(exp: &ExperimentConfig) -> Vec<TrialRecord> {
    let keys: Vec<_> = (0..exp.sweep.len())
        .flat_map(|s| (0..exp.schemes.len()).flat_map(move |k| (0..exp.n_trials).map(move |t| (s, k, t))))
        .collect();
    let mut records: Vec<TrialRecord> = keys.par_iter().map(|&k| run_one(exp, k)).collect();
    records.sort_by_key(|r| r.key);
    for r in &mut records {
        if r.user_rate.is_finite() {
            let rs = secrecy_rate(r.user_rate, r.eve_rate);
            debug_assert!((rs - r.secrecy_rate).abs() <= 1e-12);
            r.secrecy_rate = rs;
        }
    }
    records
}

/// Mean secrecy rate per (sweep index, scheme index).
pub fn mean_by_point(exp: &ExperimentConfig, records: &[TrialRecord]) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![(0.0, 0usize); exp.schemes.len()]; exp.sweep.len()];
    for r in records.iter().filter(|r| r.secrecy_rate.is_finite()) {
        let e = &mut sums[r.key.0][r.key.1];
        e.0 += r.secrecy_rate;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(s, n)| if n == 0 { f64::NAN } else { s / n as f64 })
                .collect()
        })
        .collect()
}
