//! Additive quantization noise model of the transmit DACs.
//!
//! A `b`-bit quantizer is replaced by its linear surrogate
//! `Q(x) ≈ b_Q·x + q`, where `q` is uncorrelated distortion with covariance
//! `b_Q(1 − b_Q)·diag(x xᴴ)`.

use alloc::format;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::C64;

/// Distortion factor of a 1-bit quantizer. The closed form is loose at one
/// bit, so this tabulated value is used instead.
pub const ETA_ONE_BIT: f64 = 0.3634;

/// `η_b`: 0.3634 for one bit, `(π√3/2)·2^(−2b)` beyond.
pub fn distortion_factor(bits: u32) -> Result<f64> {
    match bits {
        0 => Err(Error::Domain("DAC resolution must be ≥ 1 bit".into())),
        1 => Ok(ETA_ONE_BIT),
        b => {
            let c = core::f64::consts::PI * libm::sqrt(3.0) / 2.0;
            Ok(c * libm::pow(2.0, -2.0 * b as f64))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationModel {
    /// `None` for an ideal (unquantized) transmitter.
    pub bits: Option<u32>,
    pub eta: f64,
    pub b_q: f64,
}

impl QuantizationModel {
    pub fn new(bits: u32) -> Result<Self> {
        let eta = distortion_factor(bits)?;
        Ok(Self {
            bits: Some(bits),
            eta,
            b_q: 1.0 - eta,
        })
    }

    /// Hardware-unlimited transmitter: `b_Q = 1`, no distortion.
    pub fn ideal() -> Self {
        Self {
            bits: None,
            eta: 0.0,
            b_q: 1.0,
        }
    }

    /// `b_Q(1 − b_Q)`, the weight of the distortion covariance.
    pub fn distortion_weight(&self) -> f64 {
        self.b_q * (1.0 - self.b_q)
    }
}

fn check_weight(b_q: f64) -> Result<()> {
    if b_q > 0.0 && b_q <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("b_Q must lie in (0, 1], got {b_q}")))
    }
}

/// Diagonal of the distortion covariance `b_Q(1 − b_Q)·diag(w wᴴ)`.
pub fn quant_covariance(b_q: f64, w: &DVector<C64>) -> Result<DVector<f64>> {
    check_weight(b_q)?;
    let k = b_q * (1.0 - b_q);
    Ok(w.map(|z| k * z.norm_sqr()))
}

/// Radiated power `‖b_Q w‖² + tr(A_Q)` behind a semi-unitary codebook.
pub fn transmit_power(b_q: f64, w: &DVector<C64>) -> Result<f64> {
    let cov = quant_covariance(b_q, w)?;
    Ok(b_q * b_q * w.norm_squared() + cov.sum())
}
