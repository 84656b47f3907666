//! Element-wise block coordinate descent over the RIS phases.
//!
//! With `w` fixed, element `i` enters both receivers as
//! `|e^{jφ}c_i + p_i|² + Σ_k |e^{jφ}a_{i,k} + v_k|² + σ²`, where `p_i`, `v_k`
//! collect the other elements. Each such quadratic is `X + X̄cosφ − X̃sinφ`,
//! so `2^(R − R_e)` as a function of `φ_i` is a ratio of four trigonometric
//! terms:
//!
//! ```text
//! (μ + μ̄cosφ − μ̃sinφ)(λ + λ̄cosφ − λ̃sinφ)
//! ---------------------------------------
//! (η + η̄cosφ − η̃sinφ)(ρ + ρ̄cosφ − ρ̃sinφ)
//! ```
//!
//! `μ`: user signal + distortion + noise, `ρ`: user distortion + noise,
//! `η`: Eve signal + distortion + noise, `λ`: Eve distortion + noise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{wrap_angle, PhaseVector};
use crate::rates::Scenario;
use crate::C64;

/// One trigonometric term `x + x̄cosφ − x̃sinφ`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Trig {
    x: f64,
    bar: f64,
    tilde: f64,
}

impl Trig {
    fn at(self, phi: f64) -> f64 {
        self.x + self.bar * libm::cos(phi) - self.tilde * libm::sin(phi)
    }

    fn slope(self, phi: f64) -> f64 {
        -self.bar * libm::sin(phi) - self.tilde * libm::cos(phi)
    }

    /// `|e^{jφ}c + p|² = |c|² + |p|² + 2Re(c p*)cosφ − 2Im(c p*)sinφ`
    fn add_square(&mut self, c: C64, p: C64) {
        let x = c * p.conj();
        self.x += c.norm_sqr() + p.norm_sqr();
        self.bar += 2.0 * x.re;
        self.tilde += 2.0 * x.im;
    }
}

/// The twelve per-element scalars of the single-element ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcdCoefficients {
    pub mu: f64,
    pub mu_bar: f64,
    pub mu_tilde: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub eta_tilde: f64,
    pub lambda: f64,
    pub lambda_bar: f64,
    pub lambda_tilde: f64,
    pub rho: f64,
    pub rho_bar: f64,
    pub rho_tilde: f64,
}

impl BcdCoefficients {
    fn from_terms(mu: Trig, eta: Trig, lambda: Trig, rho: Trig) -> Self {
        Self {
            mu: mu.x,
            mu_bar: mu.bar,
            mu_tilde: mu.tilde,
            eta: eta.x,
            eta_bar: eta.bar,
            eta_tilde: eta.tilde,
            lambda: lambda.x,
            lambda_bar: lambda.bar,
            lambda_tilde: lambda.tilde,
            rho: rho.x,
            rho_bar: rho.bar,
            rho_tilde: rho.tilde,
        }
    }

    fn terms(&self) -> [Trig; 4] {
        let t = |x, bar, tilde| Trig { x, bar, tilde };
        [
            t(self.mu, self.mu_bar, self.mu_tilde),
            t(self.eta, self.eta_bar, self.eta_tilde),
            t(self.lambda, self.lambda_bar, self.lambda_tilde),
            t(self.rho, self.rho_bar, self.rho_tilde),
        ]
    }

    /// True when the ratio does not depend on `φ`.
    pub fn is_flat(&self) -> bool {
        self.terms().iter().all(|t| t.bar == 0.0 && t.tilde == 0.0)
    }
}

/// `ln` of the ratio and its derivative in `φ`.
fn log_ratio(c: &BcdCoefficients, phi: f64) -> f64 {
    let [mu, eta, lambda, rho] = c.terms();
    libm::log(mu.at(phi)) - libm::log(eta.at(phi)) + libm::log(lambda.at(phi)) - libm::log(rho.at(phi))
}

fn log_ratio_slope(c: &BcdCoefficients, phi: f64) -> f64 {
    let [mu, eta, lambda, rho] = c.terms();
    mu.slope(phi) / mu.at(phi) - eta.slope(phi) / eta.at(phi) + lambda.slope(phi) / lambda.at(phi)
        - rho.slope(phi) / rho.at(phi)
}

/// The ratio at angle `φ`. Errors if any term is not strictly positive,
/// which would mean the coefficients are inconsistent.
pub fn ratio_objective(c: &BcdCoefficients, phi: f64) -> Result<f64> {
    let [mu, eta, lambda, rho] = c.terms();
    let v = [mu.at(phi), eta.at(phi), lambda.at(phi), rho.at(phi)];
    // NaN counts as non-positive
    if v.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::Internal(format!(
            "non-positive term in phase ratio at φ = {phi}: {v:?}"
        )));
    }
    Ok(v[0] * v[2] / (v[1] * v[3]))
}

/// The ratio after the substitution `t = tan(φ/2)`; each term becomes
/// `(x(1+t²) + x̄(1−t²) − 2x̃t)/(1+t²)` and the `1+t²` factors cancel.
pub fn ratio_objective_tan(c: &BcdCoefficients, t: f64) -> f64 {
    let n = |x: Trig| x.x * (1.0 + t * t) + x.bar * (1.0 - t * t) - 2.0 * x.tilde * t;
    let [mu, eta, lambda, rho] = c.terms();
    n(mu) * n(lambda) / (n(eta) * n(rho))
}

/// Normalized stationarity residual of the ratio in `t = tan(φ/2)`:
/// `Σ ±((x − x̄)t − x̃)/(x(1+t²) + x̄(1−t²) − 2x̃t)` over the four terms,
/// divided by the sum of the magnitudes of its summands.
pub fn stationarity_residual(c: &BcdCoefficients, phi: f64) -> f64 {
    let t = libm::tan(phi / 2.0);
    let term =
        |x: Trig| ((x.x - x.bar) * t - x.tilde) / (x.x * (1.0 + t * t) + x.bar * (1.0 - t * t) - 2.0 * x.tilde * t);
    let [mu, eta, lambda, rho] = c.terms();
    let parts = [term(mu), -term(eta), term(lambda), -term(rho)];
    let scale: f64 = parts.iter().map(|x| x.abs()).sum();
    if scale < 1e-300 {
        0.0
    } else {
        parts.iter().sum::<f64>().abs() / scale
    }
}

/// Number of grid points of the 1-D search.
pub const GRID_POINTS: usize = 2048;

/// Global maximizer of the ratio over `[0, 2π)`: grid search, then a
/// stationary point inside the best grid bracket (bisection on the slope,
/// golden section when the slope does not change sign there).
pub fn best_phase(c: &BcdCoefficients) -> f64 {
    if c.is_flat() {
        return 0.0;
    }
    let h = TAU / GRID_POINTS as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    let mut worst_val = f64::INFINITY;
    for k in 0..GRID_POINTS {
        let v = log_ratio(c, k as f64 * h);
        if v > best_val {
            best = k;
            best_val = v;
        }
        worst_val = worst_val.min(v);
    }
    if best_val - worst_val <= 0.0 {
        return 0.0;
    }
    let centre = best as f64 * h;
    let (mut a, mut b) = (centre - h, centre + h);
    let refined = if log_ratio_slope(c, a) > 0.0 && log_ratio_slope(c, b) < 0.0 {
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if log_ratio_slope(c, m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    } else {
        golden_max(|x| log_ratio(c, x), a, b, 1e-10)
    };
    if log_ratio(c, refined) >= best_val {
        wrap_angle(refined)
    } else {
        centre
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Level index of the point of the `L`-level set nearest to `φ` in circular
/// distance; ties go to the lower index.
pub fn nearest_level(phi: f64, levels: u32) -> u32 {
    let step = TAU / levels as f64;
    let p = wrap_angle(phi);
    let k0 = libm::floor(p / step) as u32;
    let k0 = k0.min(levels - 1);
    let d0 = p - k0 as f64 * step;
    let d1 = (k0 + 1) as f64 * step - p;
    if k0 + 1 == levels {
        // the upper neighbour is level 0
        if d1 <= d0 {
            0
        } else {
            k0
        }
    } else if d1 < d0 {
        k0 + 1
    } else {
        k0
    }
}

/// Projection of `φ` onto `{0, Δθ, …, (L−1)Δθ}`.
pub fn project_discrete(phi: f64, levels: u32) -> f64 {
    nearest_level(phi, levels) as f64 * (TAU / levels as f64)
}

/// Per-element quantities that depend only on `w`: `c`, `d` (signal) and
/// the rows of `A`, `B` (distortion), all `θ`-free.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProblem {
    pub c: DVector<C64>,
    pub d: DVector<C64>,
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
    pub noise_user: f64,
    pub noise_eve: f64,
}

impl PhaseProblem {
    /// `c = b_Q diag(hᴴ) G F_RF w`, `A = sqrt(b_Q(1−b_Q)) diag(hᴴ) G F_RF diag(w)`,
    /// and likewise `d`, `B` with `h_e`.
    pub fn new(sc: &Scenario, w: &DVector<C64>) -> Result<Self> {
        if w.len() != sc.n_rf() {
            return Err(Error::Dimension(format!(
                "{} weights for {} RF chains",
                w.len(),
                sc.n_rf()
            )));
        }
        let n = sc.n_ris();
        let s = libm::sqrt(sc.q.distortion_weight());
        let gw = &sc.gf * w;
        let bq = sc.q.b_q;
        let c = DVector::from_fn(n, |i, _| sc.ch.h[i].conj() * gw[i] * bq);
        let d = DVector::from_fn(n, |i, _| sc.ch.h_e[i].conj() * gw[i] * bq);
        let a = DMatrix::from_fn(n, w.len(), |i, k| sc.ch.h[i].conj() * sc.gf[(i, k)] * w[k] * s);
        let b = DMatrix::from_fn(n, w.len(), |i, k| sc.ch.h_e[i].conj() * sc.gf[(i, k)] * w[k] * s);
        Ok(Self {
            c,
            d,
            a,
            b,
            noise_user: sc.noise_user,
            noise_eve: sc.noise_eve,
        })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    fn sums(&self, theta: &[C64]) -> Sums {
        let mut s = Sums {
            user: C64::new(0.0, 0.0),
            eve: C64::new(0.0, 0.0),
            dist_user: vec![C64::new(0.0, 0.0); self.a.ncols()],
            dist_eve: vec![C64::new(0.0, 0.0); self.a.ncols()],
        };
        for (i, &t) in theta.iter().enumerate() {
            s.shift(self, i, t);
        }
        s
    }

    /// `2^(R − R_e)` at the given phases.
    pub fn ratio(&self, theta: &[C64]) -> f64 {
        self.sums(theta).ratio(self)
    }

    fn coefficients_from(&self, s: &Sums, theta_i: C64, i: usize) -> BcdCoefficients {
        let zero = Trig {
            x: 0.0,
            bar: 0.0,
            tilde: 0.0,
        };
        let (mut su, mut se, mut du, mut de) = (zero, zero, zero, zero);
        su.add_square(self.c[i], s.user - theta_i * self.c[i]);
        se.add_square(self.d[i], s.eve - theta_i * self.d[i]);
        for k in 0..self.a.ncols() {
            du.add_square(self.a[(i, k)], s.dist_user[k] - theta_i * self.a[(i, k)]);
            de.add_square(self.b[(i, k)], s.dist_eve[k] - theta_i * self.b[(i, k)]);
        }
        let plus = |x: Trig, y: Trig, c: f64| Trig {
            x: x.x + y.x + c,
            bar: x.bar + y.bar,
            tilde: x.tilde + y.tilde,
        };
        let rho = plus(du, zero, self.noise_user);
        let lambda = plus(de, zero, self.noise_eve);
        BcdCoefficients::from_terms(plus(su, rho, 0.0), plus(se, lambda, 0.0), lambda, rho)
    }

    /// Coefficients of element `i` with every other element at `theta`.
    pub fn coefficients(&self, theta: &[C64], i: usize) -> BcdCoefficients {
        self.coefficients_from(&self.sums(theta), theta[i], i)
    }
}

/// Running sums `Σ_j θ_j c_j`, `Σ_j θ_j d_j` and the distortion columns.
struct Sums {
    user: C64,
    eve: C64,
    dist_user: Vec<C64>,
    dist_eve: Vec<C64>,
}

impl Sums {
    fn shift(&mut self, p: &PhaseProblem, i: usize, delta: C64) {
        self.user += delta * p.c[i];
        self.eve += delta * p.d[i];
        for k in 0..self.dist_user.len() {
            self.dist_user[k] += delta * p.a[(i, k)];
            self.dist_eve[k] += delta * p.b[(i, k)];
        }
    }

    fn ratio(&self, p: &PhaseProblem) -> f64 {
        let du: f64 = self.dist_user.iter().map(|x| x.norm_sqr()).sum::<f64>() + p.noise_user;
        let de: f64 = self.dist_eve.iter().map(|x| x.norm_sqr()).sum::<f64>() + p.noise_eve;
        (1.0 + self.user.norm_sqr() / du) / (1.0 + self.eve.norm_sqr() / de)
    }
}

/// Coefficients of element `i` for the full state `(w, phases)`.
pub fn bcd_coefficients(sc: &Scenario, w: &DVector<C64>, phases: &PhaseVector, i: usize) -> Result<BcdCoefficients> {
    if i >= phases.len() || phases.len() != sc.n_ris() {
        return Err(Error::Dimension(format!("element {i} of {} phases", phases.len())));
    }
    Ok(PhaseProblem::new(sc, w)?.coefficients(&phases.theta(), i))
}

/// One element update of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcdEvent {
    pub sweep: usize,
    pub element: usize,
    pub phi: f64,
    /// Secrecy rate after the update.
    pub secrecy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdOutcome {
    pub phases: PhaseVector,
    pub sweeps: usize,
    pub trace: Vec<BcdEvent>,
}

/// Cyclic element-wise optimization. Discrete phases (when `phases` carries
/// a level count) are projected onto the set and a projected value is kept
/// only if it raises the objective; continuous phases take the 1-D optimum
/// under the same rule. Stops after a sweep that changes nothing.
pub fn bcd_sweep(sc: &Scenario, w: &DVector<C64>, phases: &PhaseVector, max_sweeps: usize) -> Result<BcdOutcome> {
    if phases.len() != sc.n_ris() {
        return Err(Error::Dimension(format!(
            "{} phases for {} RIS elements",
            phases.len(),
            sc.n_ris()
        )));
    }
    let prob = PhaseProblem::new(sc, w)?;
    let levels = phases.levels();
    let mut out = phases.clone();
    let mut theta = out.theta();
    let mut trace = Vec::new();
    let mut sweeps = 0;
    for sweep in 0..max_sweeps {
        sweeps = sweep + 1;
        // rebuilt every sweep so incremental updates cannot drift
        let mut sums = prob.sums(&theta);
        let mut changed = false;
        #[allow(clippy::needless_range_loop)] // theta is updated in place
        for i in 0..prob.n() {
            let coeffs = prob.coefficients_from(&sums, theta[i], i);
            let cur_phi = out.angles()[i];
            let cur = ratio_objective(&coeffs, cur_phi)?;
            let mut phi = best_phase(&coeffs);
            if let Some(l) = levels {
                phi = project_discrete(phi, l);
            }
            let new = ratio_objective(&coeffs, phi)?;
            if new > cur * (1.0 + 1e-12) {
                let t = C64::from_polar(1.0, phi);
                sums.shift(&prob, i, t - theta[i]);
                theta[i] = t;
                out.set(i, phi);
                changed = true;
            }
            trace.push(BcdEvent {
                sweep,
                element: i,
                phi: out.angles()[i],
                secrecy: (libm::log(sums.ratio(&prob)) / LN_2).max(0.0),
            });
        }
        if !changed {
            break;
        }
    }
    Ok(BcdOutcome {
        phases: out,
        sweeps,
        trace,
    })
}

/// Largest search space [`exhaustive_phase_search`] accepts.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// Global optimum over the discrete set by enumeration (first maximizer in
/// lexicographic level order). Refuses instances above
/// [`EXHAUSTIVE_LIMIT`] combinations.
pub fn exhaustive_phase_search(sc: &Scenario, w: &DVector<C64>, levels: u32) -> Result<PhaseVector> {
    if levels < 2 {
        return Err(Error::Domain(format!("L must be ≥ 2, got {levels}")));
    }
    let n = sc.n_ris();
    let size = (levels as u64).checked_pow(n as u32).filter(|&s| s <= EXHAUSTIVE_LIMIT);
    let Some(size) = size else {
        return Err(Error::TooLarge(format!(
            "{levels}^{n} phase combinations exceed the limit of {EXHAUSTIVE_LIMIT}"
        )));
    };
    let prob = PhaseProblem::new(sc, w)?;
    let table: Vec<C64> = (0..levels)
        .map(|k| C64::from_polar(1.0, k as f64 * TAU / levels as f64))
        .collect();
    let mut idx = vec![0u32; n];
    let mut theta = vec![table[0]; n];
    let mut best = (f64::NEG_INFINITY, idx.clone());
    for _ in 0..size {
        let r = prob.ratio(&theta);
        if r > best.0 {
            best = (r, idx.clone());
        }
        // odometer increment, last element fastest
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < levels {
                theta[j] = table[idx[j] as usize];
                break;
            }
            idx[j] = 0;
            theta[j] = table[0];
        }
    }
    PhaseVector::discrete(&best.1, levels)
}

/// True near `φ = π`, where `t = tan(φ/2)` diverges and the residual in
/// `t` is not meaningful.
pub fn at_tan_singularity(phi: f64) -> bool {
    libm::cos(phi / 2.0).abs() < 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_channels;
    use crate::config::SystemConfig;
    use crate::model::build_codebook;
    use crate::quant::QuantizationModel;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scenario(rng: &mut ChaCha8Rng, n_ris: usize, n_tx: usize, n_rf: usize) -> Scenario {
        let cfg = SystemConfig {
            n_ris,
            n_tx,
            n_rf,
            ..SystemConfig::default()
        };
        let ch = gen_channels(&cfg, rng).unwrap();
        Scenario::new(
            ch,
            build_codebook(n_tx, n_rf).unwrap(),
            QuantizationModel::new(1).unwrap(),
            cfg.noise_user_watts(),
            cfg.noise_eve_watts(),
            cfg.power_watts,
        )
        .unwrap()
    }

    fn random_w(rng: &mut ChaCha8Rng, sc: &Scenario) -> DVector<C64> {
        let w = DVector::from_fn(sc.n_rf(), |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let scale = libm::sqrt(sc.power / (sc.q.b_q * w.norm_squared()));
        w * C64::new(scale, 0.0)
    }

    fn random_phases(rng: &mut ChaCha8Rng, n: usize) -> PhaseVector {
        PhaseVector::continuous((0..n).map(|_| rng.random_range(0.0..TAU)))
    }

    fn random_coeffs(rng: &mut ChaCha8Rng) -> BcdCoefficients {
        // positive by construction: each term is |c|²+|p|²+... with a noise floor
        let mut term = |noise: f64| {
            let mut t = Trig {
                x: noise,
                bar: 0.0,
                tilde: 0.0,
            };
            for _ in 0..3 {
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let p = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                t.add_square(c, p);
            }
            t
        };
        let rho = term(0.1);
        let lambda = term(0.1);
        let mut mu = term(0.0);
        mu.x += rho.x;
        mu.bar += rho.bar;
        mu.tilde += rho.tilde;
        let mut eta = term(0.0);
        eta.x += lambda.x;
        eta.bar += lambda.bar;
        eta.tilde += lambda.tilde;
        BcdCoefficients::from_terms(mu, eta, lambda, rho)
    }

    #[test]
    fn ratio_matches_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let sc = scenario(&mut rng, 5, 8, 4);
            let w = random_w(&mut rng, &sc);
            let ph = random_phases(&mut rng, 5);
            let rep = sc.evaluate(&ph, &w).unwrap();
            let expect = libm::exp2(rep.gap());
            for i in 0..5 {
                let c = bcd_coefficients(&sc, &w, &ph, i).unwrap();
                let got = ratio_objective(&c, ph.angles()[i]).unwrap();
                assert!((got - expect).abs() <= 1e-10 * expect, "{got} vs {expect}");
            }
        }
    }

    #[test]
    fn single_element_has_no_cross_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let sc = scenario(&mut rng, 1, 4, 2);
        let w = random_w(&mut rng, &sc);
        let c = bcd_coefficients(&sc, &w, &PhaseVector::zeros(1, None), 0).unwrap();
        assert!(c.is_flat());
    }

    #[test]
    fn zero_beamformer_gives_unit_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sc = scenario(&mut rng, 4, 4, 2);
        let w = DVector::zeros(2);
        let c = bcd_coefficients(&sc, &w, &PhaseVector::zeros(4, None), 2).unwrap();
        for k in 0..16 {
            assert_eq!(ratio_objective(&c, k as f64 * 0.4).unwrap(), 1.0);
        }
    }

    #[test]
    fn flat_coefficients_return_zero() {
        let c = BcdCoefficients::from_terms(
            Trig {
                x: 3.0,
                bar: 0.0,
                tilde: 0.0,
            },
            Trig {
                x: 2.0,
                bar: 0.0,
                tilde: 0.0,
            },
            Trig {
                x: 1.0,
                bar: 0.0,
                tilde: 0.0,
            },
            Trig {
                x: 1.5,
                bar: 0.0,
                tilde: 0.0,
            },
        );
        assert_eq!(best_phase(&c), 0.0);
        assert_eq!(ratio_objective(&c, 1.234).unwrap(), 3.0 / 3.0);
    }

    #[test]
    fn value_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let c = random_coeffs(&mut rng);
        let expect = (c.mu + c.mu_bar) * (c.lambda + c.lambda_bar) / ((c.eta + c.eta_bar) * (c.rho + c.rho_bar));
        assert!((ratio_objective(&c, 0.0).unwrap() - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn tangent_form_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..200 {
            let c = random_coeffs(&mut rng);
            let phi: f64 = rng.random_range(0.0..TAU);
            if (phi - PI).abs() < 1e-3 {
                continue;
            }
            let a = ratio_objective(&c, phi).unwrap();
            let b = ratio_objective_tan(&c, libm::tan(phi / 2.0));
            assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn best_phase_against_fine_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..20 {
            let c = random_coeffs(&mut rng);
            let phi = best_phase(&c);
            let best = ratio_objective(&c, phi).unwrap();
            let n = 100_000;
            let grid = (0..n)
                .map(|k| ratio_objective(&c, TAU * k as f64 / n as f64).unwrap())
                .fold(f64::MIN, f64::max);
            assert!(best >= grid - 1e-12 * grid);
            assert!(stationarity_residual(&c, phi) < 1e-6 || at_tan_singularity(phi));
            let h = 1e-6;
            let slope = (ratio_objective(&c, phi + h).unwrap() - ratio_objective(&c, phi - h).unwrap()) / (2.0 * h);
            assert!(slope.abs() < 1e-6 * best.max(1.0) * 10.0);
        }
    }

    #[test]
    fn projection_examples() {
        let step = TAU / 4.0;
        assert_eq!(project_discrete(0.9 * step, 4), step);
        assert_eq!(project_discrete(TAU - step / 4.0, 4), 0.0);
        assert_eq!(project_discrete(1.5 * step, 4), step);
        assert_eq!(project_discrete(0.5 * step, 4), 0.0);
        assert_eq!(project_discrete(TAU - step / 2.0, 4), 0.0);
    }

    #[test]
    fn exhaustive_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let sc = scenario(&mut rng, 1, 4, 2);
        let w = random_w(&mut rng, &sc);
        let best = exhaustive_phase_search(&sc, &w, 4).unwrap();
        let direct = (0..4u32)
            .map(|k| sc.evaluate(&PhaseVector::discrete(&[k], 4).unwrap(), &w).unwrap().gap())
            .fold(f64::MIN, f64::max);
        assert!((sc.evaluate(&best, &w).unwrap().gap() - direct).abs() < 1e-12);

        let sc = scenario(&mut rng, 2, 4, 2);
        let w = random_w(&mut rng, &sc);
        let best = exhaustive_phase_search(&sc, &w, 2).unwrap();
        let mut direct = f64::MIN;
        for a in 0..2 {
            for b in 0..2 {
                direct = direct.max(
                    sc.evaluate(&PhaseVector::discrete(&[a, b], 2).unwrap(), &w)
                        .unwrap()
                        .gap(),
                );
            }
        }
        assert!((sc.evaluate(&best, &w).unwrap().gap() - direct).abs() < 1e-12);

        let big = scenario(&mut rng, 16, 4, 2);
        assert!(matches!(
            exhaustive_phase_search(&big, &DVector::zeros(2), 4),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn sweep_is_monotone_and_discrete() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        for _ in 0..10 {
            let sc = scenario(&mut rng, 8, 16, 4);
            let w = random_w(&mut rng, &sc);
            let start = PhaseVector::zeros(8, Some(4));
            let before = sc.evaluate(&start, &w).unwrap().secrecy;
            let out = bcd_sweep(&sc, &w, &start, 20).unwrap();
            assert!(out.phases.in_discrete_set(4));
            let mut prev = before;
            for e in &out.trace {
                assert!(e.secrecy >= prev - 1e-12);
                prev = e.secrecy;
            }
            // fixed point: a second run changes nothing
            let again = bcd_sweep(&sc, &w, &out.phases, 20).unwrap();
            assert_eq!(again.phases, out.phases);
            assert_eq!(again.sweeps, 1);
        }
    }

    #[test]
    fn fine_discrete_matches_continuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..5 {
            let sc = scenario(&mut rng, 6, 8, 4);
            let w = random_w(&mut rng, &sc);
            let cont = bcd_sweep(&sc, &w, &PhaseVector::zeros(6, None), 200).unwrap();
            let fine = bcd_sweep(&sc, &w, &PhaseVector::zeros(6, Some(1 << 20)), 200).unwrap();
            let a = sc.evaluate(&cont.phases, &w).unwrap().gap();
            let b = sc.evaluate(&fine.phases, &w).unwrap().gap();
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn terms_stay_positive(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sc = scenario(&mut rng, 3, 4, 2);
            let w = random_w(&mut rng, &sc);
            let ph = random_phases(&mut rng, 3);
            let c = bcd_coefficients(&sc, &w, &ph, (seed % 3) as usize).unwrap();
            for k in 0..256 {
                prop_assert!(ratio_objective(&c, TAU * k as f64 / 256.0).is_ok());
            }
        }

        #[test]
        fn projection_is_nearest(phi in 0.0f64..TAU, levels in 2u32..64) {
            let p = project_discrete(phi, levels);
            let dist = |a: f64| { let d = (a - phi).abs(); d.min(TAU - d) };
            for k in 0..levels {
                prop_assert!(dist(p) <= dist(k as f64 * TAU / levels as f64) + 1e-12);
            }
        }
    }
}
