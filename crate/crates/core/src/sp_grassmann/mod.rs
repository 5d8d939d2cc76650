//! The symplectic Grassmann manifold `SpGr(2n, 2k)` of rank-`2k` symplectic
//! projectors `P = P² = P⁺`.
//!
//! Points are stored through a Stiefel representative `U` with `P = UU⁺`;
//! the `2n × 2n` projector is only built on request. Tangent vectors live on
//! the representative as horizontal `2n × 2k` matrices, in one of two modes:
//!
//! * [`TangentMode::Pseudo`]: `Δ = H` with `U⁺H = 0`, horizontal for the
//!   pseudo-Riemannian metric.
//! * [`TangentMode::Riem`]: `Δ = (UH⁺ − HU⁺)ᵀU` with `U⁺H = 0`, horizontal
//!   for the right-invariant Riemannian metric.

mod curves;

pub use curves::{
    cayley_retract_gr, cayley_retract_gr_proj, exp_g_gr_full, exp_g_gr_reduced, exp_h_gr,
    exp_h_gr_proj, GrCayleyCurve, GrCurve, GrPseudoGeodesic, GrRiemGeodesic,
};

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::matfun::{
    cay_inv, check_finite, identity, jt_mul, logm, mul_j, sinv, solve_right, sp_trace, sqrtm,
    HamMatrix, Lu, RealMatrix,
};
use crate::sp_stiefel::{gram_inverse, StPoint, StTangent, TANGENT_TOL};

/// Projector invariants `‖P² − P‖_F` and `‖P⁺ − P‖_F` must stay below this.
pub const PROJECTOR_TOL: f64 = 1e-8;
/// Relative tolerance for tangency of `2n × 2n` brackets.
pub const BRACKET_TOL: f64 = 1e-8;
/// Relative tolerance for `Ω̃ ∈ sp_P(2n)`, i.e. `Ω̃ = Ω̃P + PΩ̃`.
pub const SP_P_TOL: f64 = 1e-6;
/// Absolute floor added to the `sp_P` tolerance, so that `F = P` passes.
const SP_P_FLOOR: f64 = 1e-12;
/// Relative reconstruction tolerance for Riemannian horizontal vectors.
pub const RIEM_HOR_TOL: f64 = 1e-6;
/// Tolerance on `‖N⁺N − I‖_F` in the lifted Cayley inverse.
pub const N_SYMPLECTIC_TOL: f64 = 1e-8;

/// A symplectic subspace, represented by a Stiefel point `U`.
#[derive(Debug, Clone)]
pub struct GrPoint {
    rep: StPoint,
    proj: OnceLock<RealMatrix>,
}

impl PartialEq for GrPoint {
    /// Equality of representatives, not of subspaces.
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep
    }
}

impl From<StPoint> for GrPoint {
    fn from(rep: StPoint) -> Self {
        Self::new(rep)
    }
}

impl GrPoint {
    pub fn new(rep: StPoint) -> Self {
        Self {
            rep,
            proj: OnceLock::new(),
        }
    }

    pub fn rep(&self) -> &StPoint {
        &self.rep
    }

    pub fn into_rep(self) -> StPoint {
        self.rep
    }

    pub fn n(&self) -> usize {
        self.rep.n()
    }

    pub fn k(&self) -> usize {
        self.rep.k()
    }

    /// `P = UU⁺`, computed on first use.
    pub fn projector(&self) -> &RealMatrix {
        self.proj
            .get_or_init(|| self.rep.as_mat() * self.rep.sinv())
    }

    /// `(‖P² − P‖_F, ‖P⁺ − P‖_F)`.
    pub fn projector_residuals(&self) -> (f64, f64) {
        let p = self.projector();
        ((p * p - p).norm(), (sinv(p) - p).norm())
    }

    /// Same subspace, representative `UN`.
    pub fn right_mul(&self, n: &RealMatrix) -> Result<Self> {
        Ok(Self::new(self.rep.right_mul(n)?))
    }
}

/// `P = UU⁺`.
pub fn projector(p: &GrPoint) -> &RealMatrix {
    p.projector()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentMode {
    Pseudo,
    Riem,
}

/// A horizontal tangent vector at a representative `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrTangentHor {
    base: GrPoint,
    h: RealMatrix,
    delta: RealMatrix,
    mode: TangentMode,
}

fn check_u_plus_h(u: &StPoint, h: &RealMatrix) -> Result<()> {
    if h.shape() != u.as_mat().shape() {
        return Err(Error::Dimension(format!(
            "horizontal vector shape {:?} does not match base {:?}",
            h.shape(),
            u.as_mat().shape()
        )));
    }
    check_finite(h, "horizontal tangent")?;
    let residual = (u.sinv() * h).norm();
    let tol = (TANGENT_TOL + u.feasibility()) * h.norm().max(1.0);
    if !(residual <= tol) {
        return Err(Error::NotHorizontal { residual, tol });
    }
    Ok(())
}

/// `(UH⁺ − HU⁺)ᵀU = JᵀHJ UᵀU − JᵀUJ HᵀU`.
fn riem_delta(u: &RealMatrix, h: &RealMatrix) -> RealMatrix {
    jt_mul(&mul_j(h)) * u.tr_mul(u) - jt_mul(&mul_j(u)) * h.tr_mul(u)
}

impl GrTangentHor {
    /// Pseudo-mode vector `Δ = H`, checking `U⁺H = 0`.
    pub fn pseudo(base: GrPoint, h: RealMatrix) -> Result<Self> {
        check_u_plus_h(&base.rep, &h)?;
        Ok(Self::pseudo_unchecked(base, h))
    }

    /// Riem-mode vector `Δ = (UH⁺ − HU⁺)ᵀU`, checking `U⁺H = 0`.
    pub fn riem(base: GrPoint, h: RealMatrix) -> Result<Self> {
        check_u_plus_h(&base.rep, &h)?;
        Ok(Self::riem_unchecked(base, h))
    }

    pub(crate) fn pseudo_unchecked(base: GrPoint, h: RealMatrix) -> Self {
        Self {
            delta: h.clone(),
            base,
            h,
            mode: TangentMode::Pseudo,
        }
    }

    pub(crate) fn riem_unchecked(base: GrPoint, h: RealMatrix) -> Self {
        Self {
            delta: riem_delta(base.rep.as_mat(), &h),
            base,
            h,
            mode: TangentMode::Riem,
        }
    }

    pub fn zero(base: GrPoint, mode: TangentMode) -> Self {
        let h = RealMatrix::zeros(2 * base.n(), 2 * base.k());
        match mode {
            TangentMode::Pseudo => Self::pseudo_unchecked(base, h),
            TangentMode::Riem => Self::riem_unchecked(base, h),
        }
    }

    pub fn base(&self) -> &GrPoint {
        &self.base
    }

    pub fn mode(&self) -> TangentMode {
        self.mode
    }

    pub fn h(&self) -> &RealMatrix {
        &self.h
    }

    /// The horizontal Stiefel tangent `Δ`.
    pub fn delta(&self) -> &RealMatrix {
        &self.delta
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            h: &self.h * s,
            delta: &self.delta * s,
            mode: self.mode,
        }
    }

    pub fn norm(&self) -> f64 {
        self.delta.norm()
    }

    /// `Δ` as a Stiefel tangent vector at `U`.
    pub fn to_st_tangent(&self) -> StTangent {
        let u = self.base.rep.as_mat();
        let a = self.base.rep.sinv() * &self.delta;
        let h = &self.delta - u * &a;
        StTangent::from_raw_parts(self.base.rep.clone(), self.delta.clone(), a, h)
    }

    /// Pseudo-mode vector `(I − UU⁺)Δ` with the same projected direction
    /// `dρ_U(Δ)`.
    pub fn to_pseudo(&self) -> Self {
        match self.mode {
            TangentMode::Pseudo => self.clone(),
            TangentMode::Riem => {
                let u = self.base.rep.as_mat();
                let h = &self.delta - u * (self.base.rep.sinv() * &self.delta);
                Self::pseudo_unchecked(self.base.clone(), h)
            }
        }
    }

    /// `Γ = dρ_U(Δ) = ΔU⁺ + UΔ⁺`.
    pub fn bracket(&self) -> RealMatrix {
        let u = self.base.rep.as_mat();
        &self.delta * self.base.rep.sinv() + u * sinv(&self.delta)
    }
}

fn same_base(g1: &GrTangentHor, g2: &GrTangentHor) -> Result<()> {
    if g1.base == g2.base {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

fn require_mode(g: &GrTangentHor, mode: TangentMode) -> Result<()> {
    if g.mode == mode {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "expected a {mode:?}-mode tangent, got {:?}",
            g.mode
        )))
    }
}

/// `[Ω, P] = ΩP − PΩ`.
pub fn tangent_bracket(p: &GrPoint, omega: &HamMatrix) -> RealMatrix {
    let pm = p.projector();
    let om = omega.as_mat();
    om * pm - pm * om
}

/// `‖Γ − (ΓP + PΓ − 2PΓP)‖_F`, zero exactly on `T_P SpGr`.
pub fn tangency_residual(p: &GrPoint, gamma: &RealMatrix) -> f64 {
    let pm = p.projector();
    let pg = pm * gamma;
    (gamma - (gamma * pm + &pg - &pg * pm * 2.0)).norm()
}

/// Horizontal lift `ΓU` of a tangent `Γ ∈ T_P SpGr`.
pub fn hor_lift_pseudo(p: &GrPoint, gamma: &RealMatrix) -> Result<GrTangentHor> {
    let dim = 2 * p.n();
    if gamma.shape() != (dim, dim) {
        return Err(Error::Dimension(format!(
            "tangent bracket must be {dim}x{dim}, got {}x{}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let residual = tangency_residual(p, gamma);
    let tol = BRACKET_TOL * gamma.norm().max(1.0);
    if !(residual <= tol) {
        return Err(Error::NotTangent { residual, tol });
    }
    GrTangentHor::pseudo(p.clone(), gamma * p.rep.as_mat())
}

/// `tr(H₁⁺H₂)`, indefinite.
pub fn metric_h_gr(g1: &GrTangentHor, g2: &GrTangentHor) -> Result<f64> {
    same_base(g1, g2)?;
    require_mode(g1, TangentMode::Pseudo)?;
    require_mode(g2, TangentMode::Pseudo)?;
    Ok(sp_trace(&g1.h, &g2.h))
}

fn check_sp_p(om: &RealMatrix, p: &RealMatrix) -> Result<()> {
    let residual = (om - (om * p + p * om)).norm();
    let tol = SP_P_TOL * om.norm() + SP_P_FLOOR;
    if !(residual <= tol) {
        return Err(Error::Structure {
            what: "generator commuting with the reflection I - 2P",
            residual,
            tol,
        });
    }
    Ok(())
}

/// `(I − 2F)(I − 2P)`.
fn reflection_product(p: &GrPoint, f: &GrPoint) -> Result<RealMatrix> {
    if (p.n(), p.k()) != (f.n(), f.k()) {
        return Err(Error::Dimension(format!(
            "subspaces of different shape: ({}, {}) vs ({}, {})",
            p.n(),
            p.k(),
            f.n(),
            f.k()
        )));
    }
    let eye = identity(2 * p.n());
    Ok((&eye - f.projector() * 2.0) * (&eye - p.projector() * 2.0))
}

fn domain_to_out_of_domain(err: Error, what: &'static str) -> Error {
    match err {
        Error::Domain(_) | Error::Singular(_) => Error::OutOfDomain(what),
        other => other,
    }
}

/// Geodesic endpoint problem: `Γ = [Ω̃, P]` with `Ω̃ = ½ logm((I − 2F)(I − 2P))`.
pub fn log_h_gr(p: &GrPoint, f: &GrPoint) -> Result<RealMatrix> {
    let m = reflection_product(p, f)?;
    let om = logm(&m).map_err(|e| domain_to_out_of_domain(e, "geodesic endpoint logarithm"))? * 0.5;
    let pm = p.projector();
    check_sp_p(&om, pm)?;
    Ok(&om * pm - pm * &om)
}

/// Recovers `H = (I − UU⁺)JᵀΔ(UᵀU)⁻¹J` from a Riemannian-horizontal `Δ`.
pub fn hor_riem_h_from_delta(u: &GrPoint, d: &StTangent) -> Result<GrTangentHor> {
    if d.base() != u.rep() {
        return Err(Error::BaseMismatch);
    }
    let um = u.rep.as_mat();
    let delta = d.as_mat();
    let g = gram_inverse(um)?;
    let z = mul_j(&(jt_mul(delta) * g));
    let h = &z - um * (u.rep.sinv() * &z);
    let back = riem_delta(um, &h);
    let residual = (&back - delta).norm();
    let tol = RIEM_HOR_TOL * delta.norm();
    if !(residual <= tol) {
        return Err(Error::NotHorizontal { residual, tol });
    }
    Ok(GrTangentHor {
        base: u.clone(),
        h,
        delta: delta.clone(),
        mode: TangentMode::Riem,
    })
}

/// Riemannian metric on riem-mode vectors,
/// `tr(UᵀU(H₂ᵀH₁)⁺ − (UᵀH₁)⁺H₂ᵀU)`.
pub fn metric_g_gr(g1: &GrTangentHor, g2: &GrTangentHor) -> Result<f64> {
    same_base(g1, g2)?;
    require_mode(g1, TangentMode::Riem)?;
    require_mode(g2, TangentMode::Riem)?;
    let u = g1.base.rep.as_mat();
    let first = u.tr_mul(u) * sinv(&g2.h.tr_mul(&g1.h));
    let second = sinv(&u.tr_mul(&g1.h)) * g2.h.tr_mul(u);
    Ok(first.trace() - second.trace())
}

/// The same metric in ambient form `tr((UᵀU)⁻¹Δ₁ᵀ(I − UU⁺)Δ₂)`.
pub fn metric_g_gr_ambient(g1: &GrTangentHor, g2: &GrTangentHor) -> Result<f64> {
    same_base(g1, g2)?;
    let u = g1.base.rep.as_mat();
    let g = gram_inverse(u)?;
    let d2 = &g2.delta;
    let proj = d2 - u * (g1.base.rep.sinv() * d2);
    Ok((g * g1.delta.tr_mul(&proj)).trace())
}

/// Riemannian gradient of a representative-invariant objective with
/// Euclidean gradient `egrad`: `H = (I − UU⁺)Jᵀ egrad J`.
pub fn grad_g_gr(u: &GrPoint, egrad: &RealMatrix) -> Result<GrTangentHor> {
    let um = u.rep.as_mat();
    if egrad.shape() != um.shape() {
        return Err(Error::Dimension(format!(
            "gradient shape {:?} does not match base {:?}",
            egrad.shape(),
            um.shape()
        )));
    }
    check_finite(egrad, "Euclidean gradient")?;
    let z = mul_j(&jt_mul(egrad));
    let h = &z - um * (u.rep.sinv() * &z);
    Ok(GrTangentHor::riem_unchecked(u.clone(), h))
}

/// Inverse of the projector-form Cayley retraction,
/// `Γ = [Ω̃, P]` with `Ω̃ = 2 cay⁻¹(sqrtm((I − 2F)(I − 2P)))`.
pub fn cayley_inverse_gr_proj(p: &GrPoint, f: &GrPoint) -> Result<RealMatrix> {
    let m = reflection_product(p, f)?;
    let root =
        sqrtm(&m).map_err(|e| domain_to_out_of_domain(e, "square root in Cayley inverse"))?;
    let om = cay_inv(&root)
        .map_err(|e| domain_to_out_of_domain(e, "I + sqrtm in Cayley inverse"))?
        * 2.0;
    let pm = p.projector();
    check_sp_p(&om, pm)?;
    Ok(&om * pm - pm * &om)
}

/// Inverse Cayley retraction on representatives: returns `H` with
/// `R_U(H) = VN` for `N = (U⁺V)⁻¹ sqrtm(U⁺VV⁺U) ∈ Sp(2k)`.
pub fn cayley_inverse_gr_lifted(u: &GrPoint, v: &GrPoint) -> Result<GrTangentHor> {
    let (um, vm) = (u.rep.as_mat(), v.rep.as_mat());
    if um.shape() != vm.shape() {
        return Err(Error::Dimension(format!(
            "representatives of different shape: {:?} vs {:?}",
            um.shape(),
            vm.shape()
        )));
    }
    let upv = u.rep.sinv() * vm;
    let lu = Lu::new(&upv, "U+V").map_err(|e| domain_to_out_of_domain(e, "U+V singular"))?;
    let root = sqrtm(&(&upv * sinv(&upv)))
        .map_err(|e| domain_to_out_of_domain(e, "square root of U+VV+U"))?;
    let n = lu.solve(&root);
    let k2 = n.nrows();
    let residual = (sinv(&n) * &n - identity(k2)).norm();
    if !(residual <= N_SYMPLECTIC_TOL) {
        return Err(Error::Structure {
            what: "aligning factor N in Sp(2k)",
            residual,
            tol: N_SYMPLECTIC_TOL,
        });
    }
    let vn = vm * &n;
    let core = &upv * &n + identity(k2);
    let lhs = (&vn + um) * 2.0;
    let h = solve_right(&lhs, &core, "U+VN + I")
        .map_err(|e| domain_to_out_of_domain(e, "U+VN + I singular"))?
        - um * 2.0;
    GrTangentHor::pseudo(u.clone(), h)
}
