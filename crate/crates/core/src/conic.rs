//! Log-barrier interior-point solver for small dense problems of the form
//!
//! ```text
//! maximize    cᵀx + c₀ + Σ wⱼ·ln(1 + x_{vⱼ})
//! subject to  aᵀx + a₀ ≤ 0                         (linear)
//!             Σ (rⱼᵀx + sⱼ)² + aᵀx + a₀ ≤ 0         (convex quadratic)
//!             a(x)·c(x) ≥ Σ zⱼ(x)², a(x), c(x) ≥ 0  (rotated quadratic cone)
//! ```
//!
//! with `a`, `c`, `zⱼ` affine. A phase-I problem that shifts every
//! constraint by a common slack finds a strictly feasible start; phase II
//! follows the central path until the duality-gap bound `ν/τ` drops below
//! the requested tolerance.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

pub(crate) fn sq(x: f64) -> f64 {
    x * x
}

/// Dense affine form `coefᵀx + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub coef: Vec<f64>,
    pub constant: f64,
}

impl Affine {
    pub fn zero(n: usize) -> Self {
        Self {
            coef: vec![0.0; n],
            constant: 0.0,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            coef: vec![0.0; n],
            constant: c,
        }
    }

    /// `scale · x[var]`.
    pub fn var(n: usize, var: usize, scale: f64) -> Self {
        let mut a = Self::zero(n);
        a.coef[var] = scale;
        a
    }

    pub fn with(mut self, var: usize, coef: f64) -> Self {
        self.coef[var] += coef;
        self
    }

    pub fn plus(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.constant
    }

    fn extended(&self, extra: f64) -> Self {
        let mut coef = self.coef.clone();
        coef.push(extra);
        Self {
            coef,
            constant: self.constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `form ≤ 0`.
    Linear(Affine),
    /// `Σ rowⱼ² + linear ≤ 0`.
    SumSquares { rows: Vec<Affine>, linear: Affine },
    /// `a·c ≥ Σ zⱼ²` with `a, c ≥ 0`.
    RotatedCone { a: Affine, c: Affine, z: Vec<Affine> },
}

impl Constraint {
    /// Barrier complexity parameter of the constraint.
    fn nu(&self) -> f64 {
        match self {
            Constraint::RotatedCone { .. } => 2.0,
            _ => 1.0,
        }
    }

    /// Amount by which the constraint is violated (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::Linear(f) => f.eval(x).max(0.0),
            Constraint::SumSquares { rows, linear } => {
                let v = rows.iter().map(|r| sq(r.eval(x))).sum::<f64>() + linear.eval(x);
                v.max(0.0)
            }
            Constraint::RotatedCone { a, c, z } => {
                let av = a.eval(x);
                let cv = c.eval(x);
                let zz: f64 = z.iter().map(|r| sq(r.eval(x))).sum();
                // distance-like measure in the equivalent second-order form
                let zn = libm::sqrt(4.0 * zz + sq(av - cv));
                (zn - (av + cv)).max(0.0).max(-av).max(-cv)
            }
        }
    }

    /// Barrier slack, positive exactly on the interior. `None` outside.
    pub fn slack(&self, x: &[f64]) -> Option<f64> {
        let s = match self {
            Constraint::Linear(f) => -f.eval(x),
            Constraint::SumSquares { rows, linear } => {
                -(rows.iter().map(|r| sq(r.eval(x))).sum::<f64>() + linear.eval(x))
            }
            Constraint::RotatedCone { a, c, z } => {
                let av = a.eval(x);
                let cv = c.eval(x);
                if av <= 0.0 || cv <= 0.0 {
                    return None;
                }
                av * cv - z.iter().map(|r| sq(r.eval(x))).sum::<f64>()
            }
        };
        (s > 0.0 && s.is_finite()).then_some(s)
    }

    /// Adds `-ln(slack)` derivatives into `grad`/`hess`; returns the slack.
    fn accumulate(&self, x: &[f64], grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) -> f64 {
        let n = x.len();
        let mut ds = DVector::<f64>::zeros(n);
        let mut d2s = DMatrix::<f64>::zeros(n, n);
        let s = match self {
            Constraint::Linear(f) => {
                for (d, &a) in ds.iter_mut().zip(&f.coef) {
                    *d = -a;
                }
                -f.eval(x)
            }
            Constraint::SumSquares { rows, linear } => {
                let mut total = linear.eval(x);
                for (d, &a) in ds.iter_mut().zip(&linear.coef) {
                    *d = -a;
                }
                for r in rows {
                    let rv = r.eval(x);
                    total += rv * rv;
                    let g = DVector::from_column_slice(&r.coef);
                    ds.axpy(-2.0 * rv, &g, 1.0);
                    d2s.ger(-2.0, &g, &g, 1.0);
                }
                -total
            }
            Constraint::RotatedCone { a, c, z } => {
                let av = a.eval(x);
                let cv = c.eval(x);
                let ga = DVector::from_column_slice(&a.coef);
                let gc = DVector::from_column_slice(&c.coef);
                ds.axpy(cv, &ga, 0.0);
                ds.axpy(av, &gc, 1.0);
                d2s.ger(1.0, &ga, &gc, 0.0);
                d2s.ger(1.0, &gc, &ga, 1.0);
                let mut zz = 0.0;
                for r in z {
                    let rv = r.eval(x);
                    zz += rv * rv;
                    let g = DVector::from_column_slice(&r.coef);
                    ds.axpy(-2.0 * rv, &g, 1.0);
                    d2s.ger(-2.0, &g, &g, 1.0);
                }
                av * cv - zz
            }
        };
        grad.axpy(-1.0 / s, &ds, 1.0);
        hess.ger(1.0 / (s * s), &ds, &ds, 1.0);
        *hess -= d2s / s;
        s
    }

    /// Same constraint relaxed by a trailing slack variable `σ`.
    fn shifted(&self) -> Constraint {
        match self {
            Constraint::Linear(f) => Constraint::Linear(f.extended(-1.0)),
            Constraint::SumSquares { rows, linear } => Constraint::SumSquares {
                rows: rows.iter().map(|r| r.extended(0.0)).collect(),
                linear: linear.extended(-1.0),
            },
            // (a + σ/2)(c + σ/2) ≥ Σz² is the cone's second-order form
            // ‖(2z, a − c)‖ ≤ a + c relaxed by σ.
            Constraint::RotatedCone { a, c, z } => Constraint::RotatedCone {
                a: a.extended(0.5),
                c: c.extended(0.5),
                z: z.iter().map(|r| r.extended(0.0)).collect(),
            },
        }
    }

    /// Smallest shift `σ` that makes `x` strictly interior, plus margin.
    fn required_shift(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::Linear(f) => f.eval(x) + 1.0,
            Constraint::SumSquares { rows, linear } => {
                rows.iter().map(|r| sq(r.eval(x))).sum::<f64>() + linear.eval(x) + 1.0
            }
            Constraint::RotatedCone { a, c, z } => {
                let zn = libm::sqrt(z.iter().map(|r| sq(r.eval(x))).sum::<f64>());
                2.0 * (zn + 1.0 - a.eval(x).min(c.eval(x)))
            }
        }
    }
}

/// Concave term `weight · ln(1 + x[var])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerm {
    pub var: usize,
    pub weight: f64,
}

/// A maximization problem over `n` real variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub n: usize,
    pub objective: Affine,
    pub log_terms: Vec<LogTerm>,
    pub constraints: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: Affine::zero(n),
            log_terms: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
            + self
                .log_terms
                .iter()
                .map(|t| t.weight * libm::log1p(x[t.var]))
                .sum::<f64>()
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.violation(x)).fold(0.0, f64::max)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.log_terms.iter().all(|t| x[t.var] > -1.0) && self.constraints.iter().all(|c| c.slack(x).is_some())
    }

    fn nu(&self) -> f64 {
        self.constraints.iter().map(Constraint::nu).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Stop once the duality-gap bound `ν/τ` is below this.
    pub gap_tol: f64,
    /// Newton-decrement threshold of each centering step.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub tau0: f64,
    /// Barrier-parameter growth per outer step.
    pub mu: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            newton_tol: 1e-10,
            max_newton: 600,
            tau0: 1.0,
            mu: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Iteration budget ran out; the returned point is the last strictly
    /// feasible iterate.
    MaxIterations,
    /// Phase I could not find an interior point.
    Infeasible,
    /// The objective grew without bound.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    /// Duality-gap bound at exit.
    pub gap_bound: f64,
    pub newton_steps: usize,
    /// Largest phase-I slack reached, i.e. the certificate when the
    /// problem is infeasible: no point satisfies every constraint shifted
    /// by less than this amount (positive means infeasible).
    pub phase1_shift: Option<f64>,
}

/// Phase-II objective is `-(objective)`; phase I minimizes the shift
/// variable. Both are handled through this enum so the Newton loop is shared.
enum Goal<'a> {
    Maximize(&'a ConicProblem),
    MinLast,
}

struct Barrier<'a> {
    problem: &'a ConicProblem,
    goal: Goal<'a>,
}

impl Barrier<'_> {
    fn value(&self, x: &[f64], tau: f64) -> Option<f64> {
        if !self.problem.in_domain(x) {
            return None;
        }
        let mut v = match self.goal {
            Goal::Maximize(p) => -tau * p.objective_value(x),
            Goal::MinLast => tau * x[x.len() - 1],
        };
        for c in &self.problem.constraints {
            v -= libm::log(c.slack(x)?);
        }
        v.is_finite().then_some(v)
    }

    fn derivatives(&self, x: &[f64], tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        match self.goal {
            Goal::Maximize(p) => {
                for (g, &c) in grad.iter_mut().zip(&p.objective.coef) {
                    *g = -tau * c;
                }
                for t in &p.log_terms {
                    let d = 1.0 + x[t.var];
                    grad[t.var] -= tau * t.weight / d;
                    hess[(t.var, t.var)] += tau * t.weight / (d * d);
                }
            }
            Goal::MinLast => grad[n - 1] = tau,
        }
        for c in &self.problem.constraints {
            c.accumulate(x, &mut grad, &mut hess);
        }
        (grad, hess)
    }
}

fn newton_direction(grad: &DVector<f64>, hess: DMatrix<f64>) -> Option<DVector<f64>> {
    let n = grad.len();
    let scale = (0..n).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut h = hess.clone();
        for i in 0..n {
            h[(i, i)] += ridge;
        }
        if let Some(ch) = h.cholesky() {
            return Some(-ch.solve(grad));
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
    }
    None
}

/// Runs damped Newton on one barrier subproblem. Returns the number of
/// steps taken or `None` when the budget was exhausted.
fn center(
    barrier: &Barrier<'_>,
    x: &mut Vec<f64>,
    tau: f64,
    settings: &SolverSettings,
    budget: &mut usize,
    stop_when_negative_last: bool,
) -> bool {
    loop {
        if *budget == 0 {
            return false;
        }
        if stop_when_negative_last && x[x.len() - 1] < 0.0 {
            return true;
        }
        let Some(val) = barrier.value(x, tau) else {
            return false;
        };
        let (grad, hess) = barrier.derivatives(x, tau);
        let Some(dx) = newton_direction(&grad, hess) else {
            return true;
        };
        let slope = grad.dot(&dx);
        if -slope / 2.0 <= settings.newton_tol || !slope.is_finite() {
            return true;
        }
        *budget -= 1;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + step * d).collect();
            if let Some(v) = barrier.value(&trial, tau) {
                if v <= val + 0.25 * step * slope {
                    *x = trial;
                    accepted = true;
                    if val - v <= 1e-15 * val.abs().max(1.0) {
                        // decrease is at rounding level; the centre is as
                        // good as it gets
                        return true;
                    }
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // no progress possible at this precision
            return true;
        }
    }
}

fn phase_one(
    problem: &ConicProblem,
    start: &[f64],
    settings: &SolverSettings,
    budget: &mut usize,
) -> (Option<Vec<f64>>, f64) {
    let shift = problem
        .constraints
        .iter()
        .map(|c| c.required_shift(start))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1.0);
    let mut aux = ConicProblem::new(problem.n + 1);
    aux.constraints = problem.constraints.iter().map(Constraint::shifted).collect();
    // keeps phase I bounded below
    aux.constraints.push(Constraint::Linear(
        Affine::var(problem.n + 1, problem.n, -1.0).plus(-1.0),
    ));
    // and inside a box around the start, so the barrier cannot run off
    // along a recession direction before the shift turns negative
    let radius = 1e3 * (1.0 + start.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for (i, &v) in start.iter().enumerate() {
        let e = |sign: f64| Affine::var(problem.n + 1, i, sign).plus(-sign * v - radius);
        aux.constraints.push(Constraint::Linear(e(1.0)));
        aux.constraints.push(Constraint::Linear(e(-1.0)));
    }
    aux.log_terms = problem.log_terms.clone();
    aux.objective = Affine::zero(problem.n + 1);
    let barrier = Barrier {
        problem: &aux,
        goal: Goal::MinLast,
    };
    let mut x: Vec<f64> = start.to_vec();
    x.push(shift);
    let nu = aux.nu();
    let mut tau = settings.tau0;
    loop {
        let ok = center(&barrier, &mut x, tau, settings, budget, true);
        let s = x[problem.n];
        if s < 0.0 {
            x.pop();
            return (Some(x), s);
        }
        if !ok || nu / tau < settings.gap_tol {
            return (None, s);
        }
        tau *= settings.mu;
    }
}

/// Solves `problem` starting from `start` (which need not be feasible).
pub fn solve(problem: &ConicProblem, start: &[f64], settings: &SolverSettings) -> Solution {
    assert_eq!(start.len(), problem.n, "start point has wrong dimension");
    let mut budget = settings.max_newton;
    let mut phase1_shift = None;
    let interior = problem.in_domain(start)
        && problem
            .constraints
            .iter()
            .all(|c| c.slack(start).is_some_and(|v| v > 0.0));
    let mut x = if interior {
        start.to_vec()
    } else {
        let (found, s) = phase_one(problem, start, settings, &mut budget);
        phase1_shift = Some(s);
        match found {
            Some(x) => x,
            None => {
                return Solution {
                    x: start.to_vec(),
                    objective: problem.objective_value(start),
                    status: SolveStatus::Infeasible,
                    gap_bound: f64::INFINITY,
                    newton_steps: settings.max_newton - budget,
                    phase1_shift,
                }
            }
        }
    };

    let barrier = Barrier {
        problem,
        goal: Goal::Maximize(problem),
    };
    let nu = problem.nu();
    let mut tau = settings.tau0;
    let mut status = SolveStatus::Optimal;
    loop {
        let ok = center(&barrier, &mut x, tau, settings, &mut budget, false);
        if !ok {
            status = SolveStatus::MaxIterations;
            break;
        }
        if x.iter().any(|v| v.abs() > 1e12) {
            status = SolveStatus::Unbounded;
            break;
        }
        if nu / tau < settings.gap_tol {
            break;
        }
        tau *= settings.mu;
    }
    Solution {
        objective: problem.objective_value(&x),
        x,
        status,
        gap_bound: nu / tau,
        newton_steps: settings.max_newton - budget,
        phase1_shift,
    }
}
