//! Geometric mmWave channel realizations.
//!
//! Every link is a sum of a few planar-wave paths with complex Gaussian gains
//! and uniform angles, scaled by a distance-dependent path loss
//! `72 + 29.2·log10(d) + ζ` dB with real Gaussian shadowing `ζ`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::model::{ChannelSet, DirectChannels};
use crate::C64;

/// One propagation path: complex small-scale gain plus departure and
/// arrival angles (radians, broadside = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub gain: C64,
    pub departure: f64,
    pub arrival: f64,
}

impl PathParams {
    /// `gain ~ CN(0, 1)`, both angles uniform on `[-π/2, π/2]`.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let angle = Uniform::new_inclusive(-FRAC_PI_2, FRAC_PI_2).expect("finite bounds");
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Self {
            gain: C64::new(re, im) * FRAC_1_SQRT_2,
            departure: angle.sample(rng),
            arrival: angle.sample(rng),
        }
    }
}

/// Half-wavelength ULA response `a_k = e^{jπ k sin(angle)}`, `k = 0..n-1`.
pub fn steering_vector(n: usize, angle: f64) -> Result<DVector<C64>> {
    if n == 0 {
        return Err(Error::Dimension("steering vector needs n ≥ 1".into()));
    }
    let s = libm::sin(angle);
    Ok(DVector::from_fn(n, |k, _| C64::from_polar(1.0, PI * k as f64 * s)))
}

/// `72 + 29.2·log10(d) + shadowing_db`.
pub fn path_loss_db(d: f64, shadowing_db: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("distance must be > 0, got {d}")));
    }
    Ok(72.0 + 29.2 * libm::log10(d) + shadowing_db)
}

/// Linear large-scale fading coefficient `10^(PL/10)`.
pub fn path_loss_linear(pl_db: f64) -> f64 {
    libm::pow(10.0, pl_db / 10.0)
}

/// `sqrt(1/(β·L)) Σ_l α_l a(n_rx, arrival_l) a(n_tx, departure_l)ᵀ`.
pub fn geometric_matrix(n_rx: usize, n_tx: usize, paths: &[PathParams], pl_db: f64) -> Result<DMatrix<C64>> {
    if paths.is_empty() {
        return Err(Error::Dimension("at least one path required".into()));
    }
    let scale = libm::sqrt(1.0 / (path_loss_linear(pl_db) * paths.len() as f64));
    let mut out = DMatrix::<C64>::zeros(n_rx, n_tx);
    for p in paths {
        let a_rx = steering_vector(n_rx, p.arrival)?;
        let a_tx = steering_vector(n_tx, p.departure)?;
        out += (&a_rx * a_tx.transpose()) * p.gain;
    }
    Ok(out * C64::new(scale, 0.0))
}

/// `sqrt(1/(β·L)) Σ_l α_l a(n, arrival_l)`; the departure angles are unused
/// because the receivers have a single antenna.
pub fn geometric_vector(n: usize, paths: &[PathParams], pl_db: f64) -> Result<DVector<C64>> {
    if paths.is_empty() {
        return Err(Error::Dimension("at least one path required".into()));
    }
    let scale = libm::sqrt(1.0 / (path_loss_linear(pl_db) * paths.len() as f64));
    let mut out = DVector::<C64>::zeros(n);
    for p in paths {
        out += steering_vector(n, p.arrival)? * p.gain;
    }
    Ok(out * C64::new(scale, 0.0))
}

fn draw_paths<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<PathParams> {
    (0..n).map(|_| PathParams::draw(rng)).collect()
}

fn draw_loss<R: Rng + ?Sized>(rng: &mut R, d: f64, std_db: f64) -> Result<f64> {
    let z: f64 = StandardNormal.sample(rng);
    path_loss_db(d, z * std_db)
}

fn check(cfg: &SystemConfig) -> Result<()> {
    let errs = cfg.validate();
    if let Some(first) = errs.first() {
        return Err(Error::Config(format!("{first} ({} problem(s))", errs.len())));
    }
    Ok(())
}

/// Draws `G`, `h` and `h_e` for one trial.
pub fn gen_channels<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<ChannelSet> {
    check(cfg)?;
    let geo = &cfg.geometry;
    let sd = cfg.shadowing_std_db;

    let pl_g = draw_loss(rng, geo.ap_to_ris(), sd)?;
    let paths_g = draw_paths(rng, cfg.n_paths_g);
    let g = geometric_matrix(cfg.n_ris, cfg.n_tx, &paths_g, pl_g)?;

    let pl_h = draw_loss(rng, geo.ris_to_user(), sd)?;
    let paths_h = draw_paths(rng, cfg.n_paths_h);
    let h = geometric_vector(cfg.n_ris, &paths_h, pl_h)?;

    let pl_e = draw_loss(rng, geo.ris_to_eve(), sd)?;
    let paths_e = draw_paths(rng, cfg.n_paths_h);
    let h_e = geometric_vector(cfg.n_ris, &paths_e, pl_e)?;

    Ok(ChannelSet { g, h, h_e })
}

/// Draws the blocked direct AP-to-user and AP-to-Eve channels, with the
/// configured blockage loss added on top of the distance path loss.
pub fn gen_direct_channels<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<DirectChannels> {
    check(cfg)?;
    let geo = &cfg.geometry;
    let sd = cfg.shadowing_std_db;

    let pl_u = draw_loss(rng, geo.ap_to_user(), sd)? + cfg.direct_blockage_db;
    let paths_u = draw_paths(rng, cfg.n_paths_h);
    let user = geometric_vector(cfg.n_tx, &paths_u, pl_u)?;

    let pl_e = draw_loss(rng, geo.ap_to_eve(), sd)? + cfg.direct_blockage_db;
    let paths_e = draw_paths(rng, cfg.n_paths_h);
    let eve = geometric_vector(cfg.n_tx, &paths_e, pl_e)?;

    Ok(DirectChannels { user, eve })
}
