//! Channel, beamformer and phase containers plus the analog codebook.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

const TWO_PI: f64 = 2.0 * PI;

/// One realization of the RIS channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// AP to RIS, `n_ris × n_tx`.
    pub g: DMatrix<C64>,
    /// RIS to user, length `n_ris`.
    pub h: DVector<C64>,
    /// RIS to eavesdropper, length `n_ris`.
    pub h_e: DVector<C64>,
}

impl ChannelSet {
    pub fn n_ris(&self) -> usize {
        self.g.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.g.ncols()
    }

    pub fn check(&self) -> Result<()> {
        if self.h.len() != self.g.nrows() || self.h_e.len() != self.g.nrows() {
            return Err(Error::Dimension(format!(
                "G is {}x{} but h has {} and h_e has {} entries",
                self.g.nrows(),
                self.g.ncols(),
                self.h.len(),
                self.h_e.len()
            )));
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !(self.g.iter().all(finite) && self.h.iter().all(finite) && self.h_e.iter().all(finite)) {
            return Err(Error::Domain("channel contains non-finite entries".into()));
        }
        Ok(())
    }
}

/// Direct AP-to-receiver channels (length `n_tx` each). Only the scheme
/// that bypasses the RIS uses them.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectChannels {
    pub user: DVector<C64>,
    pub eve: DVector<C64>,
}

/// Fixed analog codebook and the digital beamformer it feeds.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerState {
    /// `n_tx × n_rf`, semi-unitary.
    pub f_rf: DMatrix<C64>,
    /// `n_rf` digital weights.
    pub w: DVector<C64>,
}

impl BeamformerState {
    pub fn new(f_rf: DMatrix<C64>, w: DVector<C64>) -> Result<Self> {
        if f_rf.ncols() != w.len() {
            return Err(Error::Dimension(format!(
                "codebook has {} columns, w has {} entries",
                f_rf.ncols(),
                w.len()
            )));
        }
        Ok(Self { f_rf, w })
    }

    pub fn with_w(&self, w: DVector<C64>) -> Self {
        Self {
            f_rf: self.f_rf.clone(),
            w,
        }
    }
}

/// First `n_rf` columns of the unitary `n_tx`-point DFT matrix.
pub fn build_codebook(n_tx: usize, n_rf: usize) -> Result<DMatrix<C64>> {
    if n_tx == 0 || n_rf == 0 || n_rf > n_tx {
        return Err(Error::Dimension(format!(
            "codebook needs 1 ≤ n_rf ≤ n_tx, got n_rf={n_rf}, n_tx={n_tx}"
        )));
    }
    let scale = 1.0 / libm::sqrt(n_tx as f64);
    Ok(DMatrix::from_fn(n_tx, n_rf, |k, c| {
        // reduce k·c mod n_tx first so the angle stays small
        let idx = (k * c) % n_tx;
        let ang = -TWO_PI * idx as f64 / n_tx as f64;
        C64::from_polar(scale, ang)
    }))
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi - TWO_PI * libm::floor(phi / TWO_PI);
    if !(0.0..TWO_PI).contains(&r) {
        0.0
    } else {
        r
    }
}

/// RIS phase angles, canonical in `[0, 2π)`. The unit-modulus coefficients
/// are always derived from the angles.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phi: Vec<f64>,
    levels: Option<u32>,
}

impl PhaseVector {
    /// Continuous phases; angles are wrapped into `[0, 2π)`.
    pub fn continuous(phi: impl IntoIterator<Item = f64>) -> Self {
        Self {
            phi: phi.into_iter().map(wrap_angle).collect(),
            levels: None,
        }
    }

    /// Discrete phases `k_i · 2π/L` from level indices.
    pub fn discrete(indices: &[u32], levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::Domain(format!("L must be ≥ 2, got {levels}")));
        }
        let step = TWO_PI / levels as f64;
        let mut phi = Vec::with_capacity(indices.len());
        for &k in indices {
            if k >= levels {
                return Err(Error::Domain(format!("level {k} outside 0..{levels}")));
            }
            phi.push(k as f64 * step);
        }
        Ok(Self {
            phi,
            levels: Some(levels),
        })
    }

    /// All-zero phases, discrete if `levels` is given.
    pub fn zeros(n: usize, levels: Option<u32>) -> Self {
        Self {
            phi: alloc::vec![0.0; n],
            levels,
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.phi
    }

    pub fn levels(&self) -> Option<u32> {
        self.levels
    }

    /// `e^{jφ_i}` for every element.
    pub fn theta(&self) -> Vec<C64> {
        self.phi.iter().map(|&p| C64::from_polar(1.0, p)).collect()
    }

    pub fn set(&mut self, i: usize, phi: f64) {
        self.phi[i] = wrap_angle(phi);
    }

    /// Same angles, no longer tied to a discrete set.
    pub fn into_continuous(self) -> Self {
        Self {
            phi: self.phi,
            levels: None,
        }
    }

    /// True when every angle sits on a level of the `L`-point set.
    pub fn in_discrete_set(&self, levels: u32) -> bool {
        let step = TWO_PI / levels as f64;
        self.phi.iter().all(|&p| {
            let k = libm::round(p / step);
            k >= 0.0 && k < levels as f64 && (p - k * step).abs() < 1e-9
        })
    }
}
