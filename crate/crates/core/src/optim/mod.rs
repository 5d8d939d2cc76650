//! Riemannian gradient descent with an alternating Barzilai–Borwein trial
//! step and monotone backtracking, plus the two benchmark objectives.

mod objectives;

pub use objectives::{
    nearest_symplectic_problem, subspace_fit_problem, NearestSymplectic, SubspaceFit,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::matfun::RealMatrix;
use crate::sp_grassmann::{
    grad_g_gr, metric_g_gr, GrCayleyCurve, GrCurve, GrPoint, GrRiemGeodesic, GrTangentHor,
};
use crate::sp_stiefel::{
    grad_g_st, metric_g_st, CayleyCurve, QuasiGeodesic, RiemGeodesic, StCurve, StPoint, StTangent,
};

/// A smooth function on `2n × 2k` matrices, restricted to the manifold.
pub trait Objective: Send + Sync {
    fn value(&self, u: &RealMatrix) -> f64;
    fn euclid_grad(&self, u: &RealMatrix) -> RealMatrix;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldMode {
    /// Right-invariant Riemannian metric on the Stiefel manifold.
    StiefelG,
    /// Quotient Riemannian metric on the Grassmann manifold, on representatives.
    GrassmannG,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Retraction {
    Geodesic,
    Cayley,
    QuasiGeodesic,
}

impl ManifoldMode {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldMode::StiefelG => "stiefel_g",
            ManifoldMode::GrassmannG => "grassmann_g",
        }
    }
}

impl Retraction {
    pub fn name(self) -> &'static str {
        match self {
            Retraction::Geodesic => "geodesic",
            Retraction::Cayley => "cayley",
            Retraction::QuasiGeodesic => "quasi_geodesic",
        }
    }
}

impl fmt::Display for ManifoldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Retraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManifoldMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stiefel_g" => Ok(ManifoldMode::StiefelG),
            "grassmann_g" => Ok(ManifoldMode::GrassmannG),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

impl FromStr for Retraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(Retraction::Geodesic),
            "cayley" => Ok(Retraction::Cayley),
            "quasi_geodesic" => Ok(Retraction::QuasiGeodesic),
            other => Err(Error::Config(format!("unknown retraction '{other}'"))),
        }
    }
}

/// An objective together with the geometry used to minimize it.
pub struct Problem {
    objective: Box<dyn Objective>,
    mode: ManifoldMode,
    retraction: Retraction,
}

impl Problem {
    pub fn new(
        objective: impl Objective + 'static,
        mode: ManifoldMode,
        retraction: Retraction,
    ) -> Self {
        Self {
            objective: Box::new(objective),
            mode,
            retraction,
        }
    }

    pub fn with_mode(mut self, mode: ManifoldMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_retraction(mut self, retraction: Retraction) -> Self {
        self.retraction = retraction;
        self
    }

    pub fn mode(&self) -> ManifoldMode {
        self.mode
    }

    pub fn retraction(&self) -> Retraction {
        self.retraction
    }

    pub fn value(&self, u: &StPoint) -> f64 {
        self.objective.value(u.as_mat())
    }

    pub fn euclid_grad(&self, u: &StPoint) -> RealMatrix {
        self.objective.euclid_grad(u.as_mat())
    }

    /// Riemannian gradient at `u` for the problem's metric.
    pub fn gradient(&self, u: &StPoint) -> Result<RiemGrad> {
        let egrad = self.euclid_grad(u);
        match self.mode {
            ManifoldMode::StiefelG => {
                let g = grad_g_st(u, &egrad)?;
                let sq = metric_g_st(&g, &g)?;
                Ok(RiemGrad {
                    inner: GradKind::St(g),
                    sq_norm: sq,
                })
            }
            ManifoldMode::GrassmannG => {
                let g = grad_g_gr(&GrPoint::new(u.clone()), &egrad)?;
                let sq = metric_g_gr(&g, &g)?;
                Ok(RiemGrad {
                    inner: GradKind::Gr(g),
                    sq_norm: sq,
                })
            }
        }
    }

    /// Curve `t ↦ R_U(−t grad)` for the problem's retraction.
    fn descent_curve(&self, grad: &RiemGrad) -> Result<Box<dyn Fn(f64) -> Result<StPoint> + '_>> {
        match (&grad.inner, self.retraction) {
            (GradKind::St(g), r) => {
                let d = g.scale(-1.0);
                let curve: Box<dyn StCurve> = match r {
                    Retraction::Geodesic => Box::new(RiemGeodesic::new(&d)?),
                    Retraction::Cayley => Box::new(CayleyCurve::new(&d)),
                    Retraction::QuasiGeodesic => Box::new(QuasiGeodesic::new(&d)),
                };
                Ok(Box::new(move |t| curve.at(t)))
            }
            (GradKind::Gr(g), r) => {
                let d = g.scale(-1.0);
                let curve: Box<dyn GrCurve> = match r {
                    Retraction::Geodesic => Box::new(GrRiemGeodesic::new(&d)),
                    Retraction::Cayley => Box::new(GrCayleyCurve::new(&d.to_pseudo())),
                    Retraction::QuasiGeodesic => {
                        return Err(Error::Config(
                            "the quasi-geodesic retraction is only available in stiefel_g mode"
                                .into(),
                        ))
                    }
                };
                Ok(Box::new(move |t| curve.at(t).map(GrPoint::into_rep)))
            }
        }
    }
}

#[derive(Debug, Clone)]
enum GradKind {
    St(StTangent),
    Gr(GrTangentHor),
}

/// A Riemannian gradient with its squared metric norm.
#[derive(Debug, Clone)]
pub struct RiemGrad {
    inner: GradKind,
    sq_norm: f64,
}

impl RiemGrad {
    /// The gradient as a `2n × 2k` matrix.
    pub fn as_mat(&self) -> &RealMatrix {
        match &self.inner {
            GradKind::St(g) => g.as_mat(),
            GradKind::Gr(g) => g.delta(),
        }
    }

    /// `⟨grad, grad⟩_U` in the problem's metric.
    pub fn sq_norm(&self) -> f64 {
        self.sq_norm
    }

    /// Frobenius norm of the gradient matrix, used by the stopping test.
    pub fn frobenius(&self) -> f64 {
        self.as_mat().norm()
    }

    pub fn as_st_tangent(&self) -> Option<&StTangent> {
        match &self.inner {
            GradKind::St(g) => Some(g),
            GradKind::Gr(_) => None,
        }
    }

    pub fn as_gr_tangent(&self) -> Option<&GrTangentHor> {
        match &self.inner {
            GradKind::Gr(g) => Some(g),
            GradKind::St(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub beta: f64,
    pub delta: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub h_min: i32,
    pub h_max: i32,
    pub eps_grad: f64,
    pub eps_x: f64,
    pub eps_f: f64,
    pub max_iters: usize,
    /// Record wall-clock time per iteration; off keeps traces reproducible.
    pub timing: bool,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            beta: 1e-4,
            delta: 0.1,
            gamma_min: 1e-15,
            gamma_max: 1e15,
            h_min: 0,
            h_max: 5,
            eps_grad: 1e-6,
            eps_x: 1e-6,
            eps_f: 1e-12,
            max_iters: 100,
            timing: false,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0
            && self.beta < 1.0
            && self.delta > 0.0
            && self.delta < 1.0
            && self.gamma_min > 0.0
            && self.gamma_min < self.gamma_max
            && self.h_min <= self.h_max;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid descent parameters: {self:?}"
            )))
        }
    }

    fn clamp(&self, gamma: f64) -> f64 {
        if gamma.is_nan() {
            return self.gamma_min;
        }
        gamma.clamp(self.gamma_min, self.gamma_max)
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iter: usize,
    pub fval: f64,
    pub grad_norm: f64,
    pub step_t: f64,
    /// Seconds since the start of the run, `NaN` when timing is off.
    pub wall_time: f64,
    /// Set when no backtracking trial passed the decrease test.
    pub no_decrease: bool,
}

#[derive(Debug, Clone)]
pub struct DescentState {
    pub iterate: StPoint,
    pub grad: RiemGrad,
    pub prev_iterate: Option<StPoint>,
    pub prev_grad: Option<RiemGrad>,
    pub fval: f64,
    /// Initial trial step `γ₀ = f(U₀)`.
    pub gamma_abb: f64,
    /// Number of completed iterations.
    pub iter: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

impl DescentState {
    pub fn new(problem: &Problem, u0: StPoint) -> Result<Self> {
        let fval = problem.value(&u0);
        let grad = problem.gradient(&u0)?;
        Ok(Self {
            iterate: u0,
            grad,
            prev_iterate: None,
            prev_grad: None,
            fval,
            gamma_abb: fval,
            iter: 0,
            converged: false,
            trace: Vec::new(),
        })
    }

    pub fn warnings(&self) -> usize {
        self.trace.iter().filter(|e| e.no_decrease).count()
    }
}

/// Degenerate curvature pairs below this magnitude fall back to `γ_min`.
const ABB_DEGENERATE: f64 = 1e-300;

/// Clamped alternating Barzilai–Borwein trial step, with Euclidean inner
/// products of `S = U_k − U_{k−1}` and `Y = grad_k − grad_{k−1}`.
pub fn abb_step(state: &DescentState, cfg: &DescentConfig) -> f64 {
    let (prev_u, prev_g) = match (&state.prev_iterate, &state.prev_grad) {
        (Some(u), Some(g)) if state.iter > 0 => (u, g),
        _ => return cfg.clamp(state.gamma_abb),
    };
    let s = state.iterate.as_mat() - prev_u.as_mat();
    let y = state.grad.as_mat() - prev_g.as_mat();
    let sy = s.dot(&y).abs();
    let raw = if state.iter % 2 == 1 {
        if sy < ABB_DEGENERATE {
            return cfg.gamma_min;
        }
        s.norm_squared() / sy
    } else {
        let yy = y.norm_squared();
        if yy < ABB_DEGENERATE {
            return cfg.gamma_min;
        }
        sy / yy
    };
    cfg.clamp(raw)
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub t: f64,
    pub next: StPoint,
    pub fnext: f64,
    /// False when no trial passed and the last evaluable one was taken.
    pub accepted: bool,
}

/// Backtracking on `t = γδʰ`, `h = h_min..=h_max`, with the test
/// `f(R(−t grad)) ≤ f(U) − βt⟨grad, grad⟩_U`. Singular trials count as
/// `f = +∞`.
pub fn line_search(
    problem: &Problem,
    state: &DescentState,
    gamma: f64,
    cfg: &DescentConfig,
) -> Result<LineSearchOutcome> {
    let curve = problem.descent_curve(&state.grad)?;
    let slope = state.grad.sq_norm();
    let mut last: Option<(f64, StPoint, f64)> = None;
    for h in cfg.h_min..=cfg.h_max {
        let t = gamma * cfg.delta.powi(h);
        let next = match curve(t) {
            Ok(p) => p,
            Err(e) if e.is_numerical() => continue,
            Err(e) => return Err(e),
        };
        let f = problem.value(&next);
        let f = if f.is_finite() { f } else { f64::INFINITY };
        if f <= state.fval - cfg.beta * t * slope {
            return Ok(LineSearchOutcome {
                t,
                next,
                fnext: f,
                accepted: true,
            });
        }
        last = Some((t, next, f));
    }
    match last {
        Some((t, next, fnext)) => Ok(LineSearchOutcome {
            t,
            next,
            fnext,
            accepted: false,
        }),
        None => Err(Error::StepFailure(state.iter)),
    }
}

/// Runs the descent loop from `u0` until the nested stopping test passes or
/// `cfg.max_iters` iterations are done.
pub fn descend(problem: &Problem, u0: StPoint, cfg: &DescentConfig) -> Result<DescentState> {
    cfg.validate()?;
    let start = Instant::now();
    let mut state = DescentState::new(problem, u0)?;
    let two_n = state.iterate.as_mat().nrows() as f64;
    while state.iter < cfg.max_iters {
        let gamma = abb_step(&state, cfg);
        let step = line_search(problem, &state, gamma, cfg)?;
        let grad_norm = state.grad.frobenius();
        state.trace.push(TraceEntry {
            iter: state.iter,
            fval: state.fval,
            grad_norm,
            step_t: step.t,
            wall_time: if cfg.timing {
                start.elapsed().as_secs_f64()
            } else {
                f64::NAN
            },
            no_decrease: !step.accepted,
        });

        let rel_f = (state.fval - step.fnext).abs() / (state.fval.abs() + 1.0);
        let rel_x = (state.iterate.as_mat() - step.next.as_mat()).norm() / two_n.sqrt();
        let converged = grad_norm < cfg.eps_grad && rel_f < cfg.eps_f && rel_x < cfg.eps_x;

        let grad = problem.gradient(&step.next)?;
        let prev_u = std::mem::replace(&mut state.iterate, step.next);
        let prev_g = std::mem::replace(&mut state.grad, grad);
        state.prev_iterate = Some(prev_u);
        state.prev_grad = Some(prev_g);
        state.fval = step.fnext;
        state.iter += 1;
        if converged {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests;
