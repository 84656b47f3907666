//! Projected gradient ascent on `R − R_e` over the power ball, used as an
//! independent check of the SCA beamformer.

use core::f64::consts::LN_2;

use nalgebra::DVector;

use crate::rates::apply_row;
use crate::sca::BeamInstance;
use crate::C64;

/// Steepest-ascent direction `2·∂f/∂w*` of `f = R − R_e` (bits/s/Hz). Its
/// real and imaginary parts are the partial derivatives with respect to
/// `Re w` and `Im w`.
pub fn gradient(inst: &BeamInstance, w: &DVector<C64>) -> DVector<C64> {
    let kappa = inst.weight();
    let bq = inst.b_q;
    let part = |m: &DVector<C64>, noise: f64| {
        let dw = apply_row(m, w) * bq;
        let s = dw.norm_sqr();
        let omega = crate::rates::distortion_plus_noise(m, w, kappa, noise);
        // ∂S/∂w* = Dᴴ(Dw), ∂ω/∂w* = κ|m|²∘w
        let ds = m.map(|x| (x * bq).conj() * dw);
        let domega = DVector::from_fn(m.len(), |k, _| w[k] * (kappa * m[k].norm_sqr()));
        let a = 1.0 / (omega + s);
        let b = 1.0 / omega;
        (ds + &domega) * C64::new(a, 0.0) - domega * C64::new(b, 0.0)
    };
    let g = part(&inst.user, inst.noise_user) - part(&inst.eve, inst.noise_eve);
    g * C64::new(2.0 / LN_2, 0.0)
}

/// Radial projection onto `b_Q‖w‖² ≤ P`.
pub fn project_to_ball(w: &DVector<C64>, b_q: f64, power: f64) -> DVector<C64> {
    let used = b_q * w.norm_squared();
    if used <= power {
        w.clone()
    } else {
        w * C64::new(libm::sqrt(power / used), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgaSettings {
    pub max_iterations: usize,
    /// Stop once an accepted step improves the objective by less than this.
    pub tolerance: f64,
}

impl Default for PgaSettings {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-10,
        }
    }
}

/// Projected gradient ascent with Armijo backtracking, started from full
/// power MRT. Returns the best iterate.
pub fn pga_baseline(inst: &BeamInstance, settings: &PgaSettings) -> DVector<C64> {
    if inst.power == 0.0 || inst.user.norm() == 0.0 {
        return DVector::zeros(inst.n());
    }
    let (norm, factor) = inst.normalized();
    let mut v = norm.mrt();
    let mut f = norm.objective(&v);
    let mut step = 1.0;
    for _ in 0..settings.max_iterations {
        let g = gradient(&norm, &v);
        let mut accepted = None;
        for _ in 0..60 {
            let cand = project_to_ball(&(&v + &g * C64::new(step, 0.0)), norm.b_q, 1.0);
            let fc = norm.objective(&cand);
            let dir: f64 = g.iter().zip((&cand - &v).iter()).map(|(a, b)| (a.conj() * b).re).sum();
            if fc >= f + 1e-4 * dir && fc >= f {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, fc)) => {
                let gain = fc - f;
                v = cand;
                f = fc;
                step *= 2.0;
                if gain < settings.tolerance {
                    break;
                }
            }
            None => break,
        }
    }
    v * C64::new(factor, 0.0)
}
