//! Alternating optimization of the digital beamformer and the RIS phases,
//! and the comparison schemes built from the same pieces.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bcd::bcd_sweep;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::model::{build_codebook, ChannelSet, DirectChannels, PhaseVector};
use crate::quant::QuantizationModel;
use crate::rates::{EffectiveLinks, LinkGains, RateReport, Scenario};
use crate::sca::{sca_solve, BeamInstance, ScaSettings, ScaWarning};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeKind {
    /// SCA beamforming alternated with discrete-phase BCD.
    Proposed,
    /// MRT beamformer, discrete-phase BCD.
    MrtBcd,
    /// SCA beamforming over a weak direct link, RIS removed.
    NoRis,
    /// Ideal DACs and continuous phases.
    UpperBound,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [Self::Proposed, Self::MrtBcd, Self::NoRis, Self::UpperBound];

    pub fn name(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::MrtBcd => "mrt-bcd",
            Self::NoRis => "no-ris",
            Self::UpperBound => "upper-bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoWarning {
    Sca(ScaWarning),
    /// The user's effective channel vanished; MRT returned zero.
    ZeroChannel,
    /// The outer loop used all its iterations.
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_sweeps: usize,
    pub sca: ScaSettings,
}

impl Default for AoSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 20,
            max_sweeps: 20,
            sca: ScaSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoResult {
    pub w: DVector<C64>,
    pub phases: PhaseVector,
    pub initial_phases: PhaseVector,
    /// Secrecy rate per outer iteration; entry 0 is the initial point.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Outer iterations performed (not counting the initial point).
    pub iterations: usize,
    pub rates: RateReport,
    pub warnings: Vec<AoWarning>,
}

fn note(list: &mut Vec<AoWarning>, w: AoWarning) {
    if !list.contains(&w) {
        list.push(w);
    }
}

/// `sqrt(P/b_Q)·Dᴴ/‖D‖`; zero (with a warning) when `D = 0`.
pub fn mrt_beamformer(links: &EffectiveLinks, q: &QuantizationModel, power: f64) -> (DVector<C64>, Option<AoWarning>) {
    let norm = links.d_user.norm();
    if norm == 0.0 {
        return (DVector::zeros(links.d_user.len()), Some(AoWarning::ZeroChannel));
    }
    let amp = libm::sqrt(power / q.b_q) / norm;
    (links.d_user.map(|d| d.conj() * amp), None)
}

/// Phase levels drawn uniformly from the `L`-point set.
pub fn random_phase_levels<R: Rng + ?Sized>(n: usize, levels: u32, rng: &mut R) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(0..levels)).collect()
}

fn instance(sc: &Scenario, gains: &LinkGains) -> BeamInstance {
    BeamInstance::new(gains, &sc.q, sc.noise_user, sc.noise_eve, sc.power)
}

/// Alternates SCA and BCD from `initial` (MRT start) until the secrecy rate
/// moves by less than the tolerance.
pub fn ao_optimize(sc: &Scenario, initial: &PhaseVector, settings: &AoSettings) -> Result<AoResult> {
    let mut warnings = Vec::new();
    let mut phases = initial.clone();
    let gains = sc.gains(&phases)?;
    let mut w = instance(sc, &gains).mrt();
    if gains.user.norm() == 0.0 {
        note(&mut warnings, AoWarning::ZeroChannel);
    }
    let start = sc.evaluate(&phases, &w)?;
    // the stopping test uses the unclamped gap: a run that starts with
    // R < R_e would otherwise stop as soon as the clamped rate stalls at 0
    let mut gap = start.gap();
    let mut trace = vec![start.secrecy];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..settings.max_iterations {
        iterations += 1;
        let gains = sc.gains(&phases)?;
        let out = sca_solve(&instance(sc, &gains), Some(&w), &settings.sca);
        for x in &out.warnings {
            note(&mut warnings, AoWarning::Sca(*x));
        }
        w = out.w;
        phases = bcd_sweep(sc, &w, &phases, settings.max_sweeps)?.phases;
        let next = sc.evaluate(&phases, &w)?;
        trace.push(next.secrecy);
        let delta = (next.gap() - gap).abs();
        gap = next.gap();
        if delta < settings.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        note(&mut warnings, AoWarning::NotConverged);
    }
    let rates = sc.evaluate(&phases, &w)?;
    Ok(AoResult {
        w,
        phases,
        initial_phases: initial.clone(),
        trace,
        converged,
        iterations,
        rates,
        warnings,
    })
}

/// Everything one trial needs: the channel draw, the direct links used by
/// the no-RIS baseline and the shared initial phase levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialInput {
    pub ch: ChannelSet,
    pub direct: DirectChannels,
    pub initial_levels: Vec<u32>,
}

/// Builds the scenario a scheme runs on.
pub fn scenario_for(kind: SchemeKind, cfg: &SystemConfig, ch: &ChannelSet) -> Result<Scenario> {
    let q = match kind {
        SchemeKind::UpperBound => QuantizationModel::ideal(),
        _ => QuantizationModel::new(cfg.dac_bits)?,
    };
    Scenario::new(
        ch.clone(),
        build_codebook(cfg.n_tx, cfg.n_rf)?,
        q,
        cfg.noise_user_watts(),
        cfg.noise_eve_watts(),
        cfg.power_watts,
    )
}

pub fn run_scheme(kind: SchemeKind, cfg: &SystemConfig, input: &TrialInput, settings: &AoSettings) -> Result<AoResult> {
    if input.initial_levels.len() != cfg.n_ris {
        return Err(Error::Dimension(format!(
            "{} initial phases for {} RIS elements",
            input.initial_levels.len(),
            cfg.n_ris
        )));
    }
    let sc = scenario_for(kind, cfg, &input.ch)?;
    let discrete = PhaseVector::discrete(&input.initial_levels, cfg.phase_levels)?;
    match kind {
        SchemeKind::Proposed => ao_optimize(&sc, &discrete, settings),
        SchemeKind::UpperBound => ao_optimize(&sc, &discrete.into_continuous(), settings),
        SchemeKind::MrtBcd => {
            let mut warnings = Vec::new();
            let gains = sc.gains(&discrete)?;
            let links = sc.links(&gains, &DVector::zeros(sc.n_rf()))?;
            let (w, warn) = mrt_beamformer(&links, &sc.q, sc.power);
            if let Some(x) = warn {
                warnings.push(x);
            }
            let start = sc.evaluate(&discrete, &w)?.secrecy;
            let out = bcd_sweep(&sc, &w, &discrete, settings.max_sweeps)?;
            let rates = sc.evaluate(&out.phases, &w)?;
            Ok(AoResult {
                w,
                phases: out.phases,
                initial_phases: discrete,
                trace: vec![start, rates.secrecy],
                converged: true,
                iterations: 1,
                rates,
                warnings,
            })
        }
        SchemeKind::NoRis => {
            let gains = LinkGains::direct(&input.direct, &sc.f_rf)?;
            let inst = instance(&sc, &gains);
            let w0 = inst.mrt();
            let start = RateReport::new(inst.user_rate(&w0), inst.eve_rate(&w0)).secrecy;
            let out = sca_solve(&inst, Some(&w0), &settings.sca);
            let rates = RateReport::new(inst.user_rate(&out.w), inst.eve_rate(&out.w));
            let mut warnings: Vec<AoWarning> = out.warnings.iter().map(|x| AoWarning::Sca(*x)).collect();
            if gains.user.norm() == 0.0 {
                note(&mut warnings, AoWarning::ZeroChannel);
            }
            Ok(AoResult {
                w: out.w,
                phases: PhaseVector::zeros(0, None),
                initial_phases: PhaseVector::zeros(0, None),
                trace: vec![start, rates.secrecy],
                converged: out.converged,
                iterations: out.trace.len() - 1,
                rates,
                warnings,
            })
        }
    }
}
