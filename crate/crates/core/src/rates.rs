//! Achievable rates of the user and the eavesdropper under the quantization
//! noise model, and the resulting secrecy rate.

use alloc::format;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{BeamformerState, ChannelSet, DirectChannels, PhaseVector};
use crate::quant::QuantizationModel;
use crate::C64;

/// Unquantized cascaded rows `hᴴΘ G F_RF` (user) and `h_eᴴΘ G F_RF` (Eve),
/// each of length `n_rf`. They do not depend on `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub user: DVector<C64>,
    pub eve: DVector<C64>,
}

impl LinkGains {
    /// Cascade through the RIS given the precomputed product `G F_RF`.
    pub fn through_ris(ch: &ChannelSet, gf: &DMatrix<C64>, phases: &PhaseVector) -> Result<Self> {
        let n = ch.n_ris();
        if phases.len() != n || gf.nrows() != n {
            return Err(Error::Dimension(format!(
                "{} phases and a {}-row G·F_RF for {} RIS elements",
                phases.len(),
                gf.nrows(),
                n
            )));
        }
        let theta = phases.theta();
        let mut user = DVector::<C64>::zeros(gf.ncols());
        let mut eve = DVector::<C64>::zeros(gf.ncols());
        for (i, t) in theta.iter().enumerate() {
            let cu = ch.h[i].conj() * t;
            let ce = ch.h_e[i].conj() * t;
            for (k, &x) in gf.row(i).iter().enumerate() {
                user[k] += cu * x;
                eve[k] += ce * x;
            }
        }
        Ok(Self { user, eve })
    }

    /// Direct links `h_dᴴ F_RF` with the RIS removed.
    pub fn direct(d: &DirectChannels, f_rf: &DMatrix<C64>) -> Result<Self> {
        if d.user.len() != f_rf.nrows() || d.eve.len() != f_rf.nrows() {
            return Err(Error::Dimension(format!(
                "direct channels of length {}/{} for {} antennas",
                d.user.len(),
                d.eve.len(),
                f_rf.nrows()
            )));
        }
        Ok(Self {
            user: (d.user.adjoint() * f_rf).transpose(),
            eve: (d.eve.adjoint() * f_rf).transpose(),
        })
    }

    pub fn len(&self) -> usize {
        self.user.len()
    }

    pub fn is_empty(&self) -> bool {
        self.user.is_empty()
    }
}

/// Effective quantities seen by the beamformer: `D = b_Q·m`,
/// `D_e = b_Q·m_e` and the interference-plus-noise terms `ω`, `ω_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveLinks {
    pub d_user: DVector<C64>,
    pub d_eve: DVector<C64>,
    pub omega_user: f64,
    pub omega_eve: f64,
}

/// `b_Q(1 − b_Q)·Σ_k |m_k|²|w_k|² + σ²`.
pub fn distortion_plus_noise(m: &DVector<C64>, w: &DVector<C64>, weight: f64, noise: f64) -> f64 {
    let s: f64 = m.iter().zip(w.iter()).map(|(a, b)| a.norm_sqr() * b.norm_sqr()).sum();
    weight * s + noise
}

/// Row-times-column product `Σ_k d_k w_k` (no conjugation).
pub fn apply_row(d: &DVector<C64>, w: &DVector<C64>) -> C64 {
    d.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
}

impl EffectiveLinks {
    pub fn from_gains(
        gains: &LinkGains,
        w: &DVector<C64>,
        q: &QuantizationModel,
        noise_user: f64,
        noise_eve: f64,
    ) -> Result<Self> {
        if gains.user.len() != w.len() || gains.eve.len() != w.len() {
            return Err(Error::Dimension(format!(
                "link gains of length {} for {} digital weights",
                gains.user.len(),
                w.len()
            )));
        }
        let k = q.distortion_weight();
        let bq = C64::new(q.b_q, 0.0);
        Ok(Self {
            d_user: &gains.user * bq,
            d_eve: &gains.eve * bq,
            omega_user: distortion_plus_noise(&gains.user, w, k, noise_user),
            omega_eve: distortion_plus_noise(&gains.eve, w, k, noise_eve),
        })
    }

    pub fn user_rate(&self, w: &DVector<C64>) -> f64 {
        rate(apply_row(&self.d_user, w).norm_sqr(), self.omega_user)
    }

    pub fn eve_rate(&self, w: &DVector<C64>) -> f64 {
        rate(apply_row(&self.d_eve, w).norm_sqr(), self.omega_eve)
    }
}

/// Builds [`EffectiveLinks`] straight from a channel draw and a full state.
pub fn effective_links(
    ch: &ChannelSet,
    phases: &PhaseVector,
    bf: &BeamformerState,
    q: &QuantizationModel,
    noise_user: f64,
    noise_eve: f64,
) -> Result<EffectiveLinks> {
    ch.check()?;
    if bf.f_rf.nrows() != ch.n_tx() {
        return Err(Error::Dimension(format!(
            "codebook has {} rows for {} antennas",
            bf.f_rf.nrows(),
            ch.n_tx()
        )));
    }
    let gf = &ch.g * &bf.f_rf;
    let gains = LinkGains::through_ris(ch, &gf, phases)?;
    EffectiveLinks::from_gains(&gains, &bf.w, q, noise_user, noise_eve)
}

/// `log2(1 + signal/denominator)`, computed through `ln_1p`.
pub fn rate(signal: f64, denominator: f64) -> f64 {
    libm::log1p(signal / denominator) / core::f64::consts::LN_2
}

/// `[r_user − r_eve]⁺`.
pub fn secrecy_rate(r_user: f64, r_eve: f64) -> f64 {
    (r_user - r_eve).max(0.0)
}

/// User, Eve and secrecy rates of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub user: f64,
    pub eve: f64,
    pub secrecy: f64,
}

impl RateReport {
    pub fn new(user: f64, eve: f64) -> Self {
        Self {
            user,
            eve,
            secrecy: secrecy_rate(user, eve),
        }
    }

    /// `R − R_e` before clamping.
    pub fn gap(&self) -> f64 {
        self.user - self.eve
    }
}

/// Everything about one trial that stays fixed while `w` and `θ` are being
/// optimized.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub ch: ChannelSet,
    pub f_rf: DMatrix<C64>,
    /// Cached `G F_RF`, `n_ris × n_rf`.
    pub gf: DMatrix<C64>,
    pub q: QuantizationModel,
    pub noise_user: f64,
    pub noise_eve: f64,
    pub power: f64,
}

impl Scenario {
    pub fn new(
        ch: ChannelSet,
        f_rf: DMatrix<C64>,
        q: QuantizationModel,
        noise_user: f64,
        noise_eve: f64,
        power: f64,
    ) -> Result<Self> {
        ch.check()?;
        if f_rf.nrows() != ch.n_tx() {
            return Err(Error::Dimension(format!(
                "codebook has {} rows for {} antennas",
                f_rf.nrows(),
                ch.n_tx()
            )));
        }
        if !(noise_user > 0.0 && noise_eve > 0.0) {
            return Err(Error::Domain("noise powers must be positive".into()));
        }
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::Domain(format!("power must be finite and ≥ 0, got {power}")));
        }
        let gf = &ch.g * &f_rf;
        Ok(Self {
            ch,
            f_rf,
            gf,
            q,
            noise_user,
            noise_eve,
            power,
        })
    }

    pub fn n_rf(&self) -> usize {
        self.f_rf.ncols()
    }

    pub fn n_ris(&self) -> usize {
        self.ch.n_ris()
    }

    pub fn gains(&self, phases: &PhaseVector) -> Result<LinkGains> {
        LinkGains::through_ris(&self.ch, &self.gf, phases)
    }

    pub fn links(&self, gains: &LinkGains, w: &DVector<C64>) -> Result<EffectiveLinks> {
        EffectiveLinks::from_gains(gains, w, &self.q, self.noise_user, self.noise_eve)
    }

    pub fn evaluate(&self, phases: &PhaseVector, w: &DVector<C64>) -> Result<RateReport> {
        let gains = self.gains(phases)?;
        let links = self.links(&gains, w)?;
        Ok(RateReport::new(links.user_rate(w), links.eve_rate(w)))
    }

    /// Same channels and codebook, different quantizer.
    pub fn with_quantizer(&self, q: QuantizationModel) -> Self {
        Self { q, ..self.clone() }
    }
}
