//! Digital beamformer design by successive convex approximation.
//!
//! With the RIS phases fixed, the beamformer problem is
//!
//! ```text
//! max_w  log2(1 + |D w|²/ω(w)) − log2(1 + |D_e w|²/ω_e(w))
//! s.t.   b_Q‖w‖² ≤ P
//! ```
//!
//! Each SCA step replaces the non-convex pieces with convex surrogates that
//! are tight at the current point `w̄` and solves the resulting problem with
//! the barrier solver in [`crate::conic`]. Every surrogate bounds the true
//! objective from below, so the true objective never decreases.
//!
//! Subproblem variables (all real, in normalized units where the user noise
//! is 1 and the power budget is 1):
//! `[Re w, Im w, z, ρ, ω, t, r, ω_e]`.
//!
//! | tag | constraint |
//! |-----|------------|
//! | C1  | `ρ ≤ (2z̄/ω̄)·z − (z̄²/ω̄²)·ω` |
//! | C2  | `1·g(w) ≥ z²`, `g` = tangent of `|Dw|²` at `w̄` |
//! | C3  | `a(t)·ω_e ≥ r²`, `a(t)` = tangent of `2^t − 1` at `t̄` |
//! | C5  | `|D_e w|² ≤ r̄² + 2r̄(r − r̄)` |
//! | C6  | `b_Q‖w‖² ≤ P` |
//! | C7  | `ω ≥ ω(w)` exactly, `ω_e ≤` tangent of `ω_e(w)` at `w̄` |

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use nalgebra::DVector;

use crate::conic::{self, Affine, ConicProblem, Constraint, LogTerm, SolveStatus, SolverSettings};
use crate::quant::QuantizationModel;
use crate::rates::{apply_row, distortion_plus_noise, rate, LinkGains};
use crate::C64;

/// Smallest anchor magnitude used for `z̄` and `r̄` (normalized units).
pub const ANCHOR_FLOOR: f64 = 1e-8;

/// Beamformer subproblem data: cascaded rows, quantizer weight, noise and
/// power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamInstance {
    pub user: DVector<C64>,
    pub eve: DVector<C64>,
    pub b_q: f64,
    pub noise_user: f64,
    pub noise_eve: f64,
    pub power: f64,
}

impl BeamInstance {
    pub fn new(gains: &LinkGains, q: &QuantizationModel, noise_user: f64, noise_eve: f64, power: f64) -> Self {
        Self {
            user: gains.user.clone(),
            eve: gains.eve.clone(),
            b_q: q.b_q,
            noise_user,
            noise_eve,
            power,
        }
    }

    pub fn n(&self) -> usize {
        self.user.len()
    }

    /// `b_Q(1 − b_Q)`.
    pub fn weight(&self) -> f64 {
        self.b_q * (1.0 - self.b_q)
    }

    /// Equivalent instance with unit user noise and unit power budget,
    /// plus the factor mapping its beamformers back (`w = factor · v`).
    pub fn normalized(&self) -> (Self, f64) {
        let factor = libm::sqrt(self.power);
        let g = C64::new(factor / libm::sqrt(self.noise_user), 0.0);
        (
            Self {
                user: &self.user * g,
                eve: &self.eve * g,
                b_q: self.b_q,
                noise_user: 1.0,
                noise_eve: self.noise_eve / self.noise_user,
                power: 1.0,
            },
            factor,
        )
    }

    /// `(|D w|², ω(w))` for the user.
    pub fn user_terms(&self, w: &DVector<C64>) -> (f64, f64) {
        let s = apply_row(&self.user, w).norm_sqr() * self.b_q * self.b_q;
        (s, distortion_plus_noise(&self.user, w, self.weight(), self.noise_user))
    }

    pub fn eve_terms(&self, w: &DVector<C64>) -> (f64, f64) {
        let s = apply_row(&self.eve, w).norm_sqr() * self.b_q * self.b_q;
        (s, distortion_plus_noise(&self.eve, w, self.weight(), self.noise_eve))
    }

    pub fn user_rate(&self, w: &DVector<C64>) -> f64 {
        let (s, o) = self.user_terms(w);
        rate(s, o)
    }

    pub fn eve_rate(&self, w: &DVector<C64>) -> f64 {
        let (s, o) = self.eve_terms(w);
        rate(s, o)
    }

    /// `R − R_e`, unclamped.
    pub fn objective(&self, w: &DVector<C64>) -> f64 {
        self.user_rate(w) - self.eve_rate(w)
    }

    /// `b_Q‖w‖²`, equal to the radiated power behind a semi-unitary codebook.
    pub fn power_used(&self, w: &DVector<C64>) -> f64 {
        self.b_q * w.norm_squared()
    }

    /// Full-power maximum ratio transmission along the user's effective
    /// channel, `sqrt(P/b_Q)·Dᴴ/‖D‖`. Zero when the user channel vanishes.
    pub fn mrt(&self) -> DVector<C64> {
        let norm = self.user.norm();
        if norm == 0.0 || self.power == 0.0 {
            return DVector::zeros(self.n());
        }
        let amp = libm::sqrt(self.power / self.b_q) / norm;
        self.user.map(|d| d.conj() * amp)
    }
}

/// Linearization points of one SCA step.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaAnchors {
    pub w: DVector<C64>,
    /// `max(|D w̄|, floor)`.
    pub z: f64,
    /// `ω(w̄)`.
    pub omega: f64,
    /// `ω_e(w̄)`.
    pub omega_eve: f64,
    /// `max(|D_e w̄|, floor)`.
    pub r: f64,
    /// `log2(1 + r̄²/ω̄_e)`.
    pub t: f64,
    /// AGM point `sqrt((2^t̄ − 1)/ω̄_e)`.
    pub eta: f64,
}

impl ScaAnchors {
    pub fn at(inst: &BeamInstance, w: &DVector<C64>) -> Self {
        let (su, omega) = inst.user_terms(w);
        let (se, omega_eve) = inst.eve_terms(w);
        let z = libm::sqrt(su).max(ANCHOR_FLOOR);
        let r = libm::sqrt(se).max(ANCHOR_FLOOR);
        let snr_e = r * r / omega_eve;
        let t = rate(r * r, omega_eve);
        Self {
            w: w.clone(),
            z,
            omega,
            omega_eve,
            r,
            t,
            eta: libm::sqrt(snr_e / omega_eve),
        }
    }
}

/// Index map of the subproblem's real variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn re(&self, k: usize) -> usize {
        k
    }
    pub fn im(&self, k: usize) -> usize {
        self.n + k
    }
    pub fn z(&self) -> usize {
        2 * self.n
    }
    pub fn rho(&self) -> usize {
        2 * self.n + 1
    }
    pub fn omega(&self) -> usize {
        2 * self.n + 2
    }
    pub fn t(&self) -> usize {
        2 * self.n + 3
    }
    pub fn r(&self) -> usize {
        2 * self.n + 4
    }
    pub fn omega_eve(&self) -> usize {
        2 * self.n + 5
    }
    pub fn len(&self) -> usize {
        2 * self.n + 6
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn w(&self, x: &[f64]) -> DVector<C64> {
        DVector::from_fn(self.n, |k, _| C64::new(x[self.re(k)], x[self.im(k)]))
    }
}

/// Convex surrogate of the beamformer problem around one anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicSubproblem {
    pub problem: ConicProblem,
    pub layout: Layout,
    pub anchors: ScaAnchors,
    /// Constraint indices of C1, C2, C3, C5 (surrogates that are tight at
    /// the anchor when no floor is active).
    pub surrogate_rows: [usize; 4],
}

/// Real and imaginary parts of `Σ d_k w_k` as affine forms.
fn row_parts(d: &DVector<C64>, lay: Layout) -> (Affine, Affine) {
    let n = lay.len();
    let mut re = Affine::zero(n);
    let mut im = Affine::zero(n);
    for (k, dk) in d.iter().enumerate() {
        re.coef[lay.re(k)] = dk.re;
        re.coef[lay.im(k)] = -dk.im;
        im.coef[lay.re(k)] = dk.im;
        im.coef[lay.im(k)] = dk.re;
    }
    (re, im)
}

/// Assembles the convex subproblem at `anchors` for a (normalized)
/// instance.
pub fn build_subproblem(anchors: &ScaAnchors, inst: &BeamInstance) -> ConicSubproblem {
    let n = inst.n();
    let lay = Layout { n };
    let nv = lay.len();
    let kappa = inst.weight();
    let bq = C64::new(inst.b_q, 0.0);
    let d_user = &inst.user * bq;
    let d_eve = &inst.eve * bq;
    let wb = &anchors.w;

    let mut p = ConicProblem::new(nv);
    p.objective = Affine::var(nv, lay.t(), -1.0);
    p.log_terms.push(LogTerm {
        var: lay.rho(),
        weight: 1.0 / LN_2,
    });

    // C1: ρ − (2z̄/ω̄)z + (z̄²/ω̄²)ω ≤ 0
    let (zb, ob) = (anchors.z, anchors.omega);
    p.constraints.push(Constraint::Linear(
        Affine::var(nv, lay.rho(), 1.0)
            .with(lay.z(), -2.0 * zb / ob)
            .with(lay.omega(), zb * zb / (ob * ob)),
    ));
    let c1 = p.constraints.len() - 1;

    // C2: z² ≤ 2Re(conj(u)·D w) − |u|², u = D w̄
    let u = apply_row(&d_user, wb);
    let (dre, dim) = row_parts(&d_user, lay);
    let mut g = Affine::constant(nv, -u.norm_sqr());
    for (i, (a, b)) in dre.coef.iter().zip(&dim.coef).enumerate() {
        g.coef[i] = 2.0 * (u.re * a + u.im * b);
    }
    p.constraints.push(Constraint::RotatedCone {
        a: Affine::constant(nv, 1.0),
        c: g,
        z: vec![Affine::var(nv, lay.z(), 1.0)],
    });
    let c2 = p.constraints.len() - 1;

    // C3: a(t)·ω_e ≥ r², a(t) = 2^t̄(1 + ln2·(t − t̄)) − 1
    let two_t = libm::exp2(anchors.t);
    let a_t = Affine::var(nv, lay.t(), two_t * LN_2).plus(two_t * (1.0 - LN_2 * anchors.t) - 1.0);
    p.constraints.push(Constraint::RotatedCone {
        a: a_t,
        c: Affine::var(nv, lay.omega_eve(), 1.0),
        z: vec![Affine::var(nv, lay.r(), 1.0)],
    });
    let c3 = p.constraints.len() - 1;

    // C5: |D_e w|² − 2r̄ r + r̄² ≤ 0
    let (ere, eim) = row_parts(&d_eve, lay);
    let rb = anchors.r;
    p.constraints.push(Constraint::SumSquares {
        rows: vec![ere, eim],
        linear: Affine::var(nv, lay.r(), -2.0 * rb).plus(rb * rb),
    });
    let c5 = p.constraints.len() - 1;

    // C6: b_Q‖w‖² ≤ P
    let sb = libm::sqrt(inst.b_q);
    let mut rows = Vec::with_capacity(2 * n);
    for k in 0..n {
        rows.push(Affine::var(nv, lay.re(k), sb));
        rows.push(Affine::var(nv, lay.im(k), sb));
    }
    p.constraints.push(Constraint::SumSquares {
        rows,
        linear: Affine::constant(nv, -inst.power),
    });

    // C7 (user): κ Σ|m_k|²|w_k|² + σ² − ω ≤ 0
    let mut rows = Vec::new();
    if kappa > 0.0 {
        for (k, m) in inst.user.iter().enumerate() {
            let c = libm::sqrt(kappa) * m.norm();
            rows.push(Affine::var(nv, lay.re(k), c));
            rows.push(Affine::var(nv, lay.im(k), c));
        }
    }
    p.constraints.push(Constraint::SumSquares {
        rows,
        linear: Affine::var(nv, lay.omega(), -1.0).plus(inst.noise_user),
    });

    // C7 (Eve): ω_e ≤ σ_e² + κ Σ|m_e,k|²(2Re(conj(w̄_k) w_k) − |w̄_k|²)
    let mut lin = Affine::var(nv, lay.omega_eve(), 1.0).plus(-inst.noise_eve);
    for (k, m) in inst.eve.iter().enumerate() {
        let c = kappa * m.norm_sqr();
        lin.coef[lay.re(k)] -= 2.0 * c * wb[k].re;
        lin.coef[lay.im(k)] -= 2.0 * c * wb[k].im;
        lin.constant += c * wb[k].norm_sqr();
    }
    p.constraints.push(Constraint::Linear(lin));

    // keeps log2(1 + ρ) finite
    p.constraints
        .push(Constraint::Linear(Affine::var(nv, lay.rho(), -1.0).plus(-0.5)));

    ConicSubproblem {
        problem: p,
        layout: lay,
        anchors: anchors.clone(),
        surrogate_rows: [c1, c2, c3, c5],
    }
}

impl ConicSubproblem {
    /// The anchor itself, with every auxiliary at its exact value.
    pub fn anchor_point(&self, inst: &BeamInstance) -> Vec<f64> {
        let lay = self.layout;
        let a = &self.anchors;
        let mut x = vec![0.0; lay.len()];
        for k in 0..lay.n {
            x[lay.re(k)] = a.w[k].re;
            x[lay.im(k)] = a.w[k].im;
        }
        let (su, _) = inst.user_terms(&a.w);
        let z = libm::sqrt(su);
        x[lay.z()] = z;
        x[lay.omega()] = a.omega;
        x[lay.rho()] = (2.0 * a.z / a.omega) * z - (a.z * a.z / (a.omega * a.omega)) * a.omega;
        x[lay.t()] = a.t;
        x[lay.r()] = a.r;
        x[lay.omega_eve()] = a.omega_eve;
        x
    }
}

impl ConicSubproblem {
    /// A strictly feasible point next to the anchor: `w = (1 − ε)w̄` with
    /// every auxiliary pulled off its bound by a relative `ε`.
    pub fn interior_point(&self, inst: &BeamInstance) -> Vec<f64> {
        const EPS: f64 = 1e-3;
        let lay = self.layout;
        let a = &self.anchors;
        let v = &a.w * C64::new(1.0 - EPS, 0.0);
        let mut x = vec![0.0; lay.len()];
        for k in 0..lay.n {
            x[lay.re(k)] = v[k].re;
            x[lay.im(k)] = v[k].im;
        }
        let bq = C64::new(inst.b_q, 0.0);
        let u = apply_row(&inst.user, &a.w) * bq;
        let g = 2.0 * (u.conj() * apply_row(&inst.user, &v) * bq).re - u.norm_sqr();
        let z = libm::sqrt(g.max(0.0)) * (1.0 - EPS);
        let (_, omega) = inst.user_terms(&v);
        let omega = omega * (1.0 + EPS);
        let rhs = (2.0 * a.z / a.omega) * z - (a.z * a.z / (a.omega * a.omega)) * omega;
        let (se, _) = inst.eve_terms(&v);
        let r = (se + a.r * a.r) / (2.0 * a.r) + EPS * a.r;
        let kappa = inst.weight();
        let mut lin = inst.noise_eve;
        for k in 0..lay.n {
            lin += kappa * inst.eve[k].norm_sqr() * (2.0 * (a.w[k].conj() * v[k]).re - a.w[k].norm_sqr());
        }
        let omega_eve = lin * (1.0 - EPS);
        let need = (1.0 + EPS) * r * r / omega_eve + EPS;
        x[lay.z()] = z;
        x[lay.omega()] = omega;
        x[lay.rho()] = rhs - EPS * (rhs.abs() + 1e-3);
        x[lay.r()] = r;
        x[lay.omega_eve()] = omega_eve;
        x[lay.t()] = a.t + ((need + 1.0) / libm::exp2(a.t) - 1.0) / LN_2;
        x
    }
}

/// Solves one subproblem from a strictly feasible start near the anchor
/// (falling back to the solver's phase I if that start is not interior).
pub fn solve_subproblem(sub: &ConicSubproblem, inst: &BeamInstance) -> conic::Solution {
    let start = sub.interior_point(inst);
    let start = if sub
        .problem
        .constraints
        .iter()
        .all(|c| c.slack(&start).is_some_and(|v| v > 0.0))
    {
        start
    } else {
        sub.anchor_point(inst)
    };
    conic::solve(&sub.problem, &start, &SolverSettings::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaWarning {
    /// The barrier solver hit its Newton budget on some step.
    SolverIterationLimit,
    /// The barrier solver reported an infeasible or unbounded subproblem;
    /// the previous iterate was kept.
    SolverFailure,
    /// A step would have lowered the true objective and was rejected.
    RejectedStep,
    /// 50 SCA iterations without meeting the tolerance.
    NotConverged,
    /// The user's effective channel is zero; nothing can be transmitted
    /// usefully, so `w = 0`.
    ZeroUserChannel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaStep {
    pub iteration: usize,
    /// True objective `R − R_e` in bits/s/Hz.
    pub objective: f64,
    /// `b_Q‖w‖²` in watts.
    pub power: f64,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub w: DVector<C64>,
    /// Entry 0 is the starting point.
    pub trace: Vec<ScaStep>,
    pub converged: bool,
    pub warnings: Vec<ScaWarning>,
}

impl ScaOutcome {
    pub fn objective(&self) -> f64 {
        self.trace.last().map_or(0.0, |s| s.objective)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 50,
        }
    }
}

fn push_warning(list: &mut Vec<ScaWarning>, w: ScaWarning) {
    if !list.contains(&w) {
        list.push(w);
    }
}

/// Runs SCA from `w0` (MRT at full power when `None` or when `w0` carries
/// no signal to the user).
pub fn sca_solve(inst: &BeamInstance, w0: Option<&DVector<C64>>, settings: &ScaSettings) -> ScaOutcome {
    let mut warnings = Vec::new();
    let n = inst.n();
    if inst.user.norm() == 0.0 || inst.power == 0.0 {
        if inst.user.norm() == 0.0 {
            warnings.push(ScaWarning::ZeroUserChannel);
        }
        let w = DVector::zeros(n);
        let step = ScaStep {
            iteration: 0,
            objective: inst.objective(&w),
            power: 0.0,
            status: SolveStatus::Optimal,
        };
        return ScaOutcome {
            w,
            trace: vec![step],
            converged: true,
            warnings,
        };
    }

    let (norm, factor) = inst.normalized();
    let mut v = match w0 {
        Some(w) if inst.user_terms(w).0 > 0.0 => {
            let mut v = w / C64::new(factor, 0.0);
            // pull slightly overfull starts back onto the power ball
            let p = norm.power_used(&v);
            if p > 1.0 {
                v /= C64::new(libm::sqrt(p), 0.0);
            }
            v
        }
        _ => norm.mrt(),
    };
    let mut obj = norm.objective(&v);
    let mut trace = vec![ScaStep {
        iteration: 0,
        objective: obj,
        power: norm.power_used(&v) * inst.power,
        status: SolveStatus::Optimal,
    }];
    let mut converged = false;
    for it in 1..=settings.max_iterations {
        let anchors = ScaAnchors::at(&norm, &v);
        let sub = build_subproblem(&anchors, &norm);
        let sol = solve_subproblem(&sub, &norm);
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::MaxIterations => push_warning(&mut warnings, ScaWarning::SolverIterationLimit),
            SolveStatus::Infeasible | SolveStatus::Unbounded => {
                push_warning(&mut warnings, ScaWarning::SolverFailure);
                trace.push(ScaStep {
                    iteration: it,
                    objective: obj,
                    power: norm.power_used(&v) * inst.power,
                    status: sol.status,
                });
                break;
            }
        }
        let cand = sub.layout.w(&sol.x);
        let cand_obj = norm.objective(&cand);
        let accepted = cand_obj >= obj - 1e-12 && norm.power_used(&cand) <= 1.0 + 1e-9;
        let delta = if accepted { cand_obj - obj } else { 0.0 };
        if accepted {
            v = cand;
            obj = cand_obj;
        } else {
            push_warning(&mut warnings, ScaWarning::RejectedStep);
        }
        trace.push(ScaStep {
            iteration: it,
            objective: obj,
            power: norm.power_used(&v) * inst.power,
            status: sol.status,
        });
        if !accepted || delta.abs() < settings.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        push_warning(&mut warnings, ScaWarning::NotConverged);
    }
    ScaOutcome {
        w: v * C64::new(factor, 0.0),
        trace,
        converged,
        warnings,
    }
}
