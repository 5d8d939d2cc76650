//! Curves on the symplectic Grassmann manifold, evaluated on representatives.

use super::{GrPoint, GrTangentHor, TangentMode};
use crate::error::{Error, Result};
use crate::matfun::{block2, cay, expm, hcat, identity, jt_mul, mul_j, sinv, RealMatrix};
use crate::sp_stiefel::{exp_g_st_full, CayleyCurve, StCurve, StPoint, StTangent};

/// A curve `t ↦ γ(t)` on `SpGr(2n, 2k)` with `γ(0)` the base subspace.
pub trait GrCurve: Send + Sync {
    fn base(&self) -> &GrPoint;
    fn at(&self, t: f64) -> Result<GrPoint>;
}

fn check(u: &GrPoint, g: &GrTangentHor, mode: TangentMode) -> Result<()> {
    if g.base() != u {
        return Err(Error::BaseMismatch);
    }
    if g.mode() != mode {
        return Err(Error::Config(format!(
            "expected a {mode:?}-mode tangent, got {:?}",
            g.mode()
        )));
    }
    Ok(())
}

fn wrap(mat: RealMatrix) -> GrPoint {
    GrPoint::new(StPoint::from_unchecked(mat))
}

/// Pseudo-Riemannian geodesic `[−H, U] expm(t[[0, −I], [H⁺H, 0]]) [0; I]`.
pub struct GrPseudoGeodesic {
    base: GrPoint,
    left: RealMatrix,
    core: RealMatrix,
}

impl GrPseudoGeodesic {
    pub fn new(g: &GrTangentHor) -> Self {
        let h = g.h();
        let k2 = h.ncols();
        let zero = RealMatrix::zeros(k2, k2);
        let core = block2(&zero, &(-identity(k2)), &(sinv(h) * h), &zero);
        Self {
            base: g.base().clone(),
            left: hcat(&[&(-h), g.base().rep().as_mat()]),
            core,
        }
    }
}

impl GrCurve for GrPseudoGeodesic {
    fn base(&self) -> &GrPoint {
        &self.base
    }

    fn at(&self, t: f64) -> Result<GrPoint> {
        let k2 = self.core.nrows() / 2;
        let e = expm(&(&self.core * t))?;
        Ok(wrap(&self.left * e.columns(k2, k2)))
    }
}

/// Riemannian geodesic from a riem-mode vector, reduced to one `8k × 8k`
/// and one `4k × 4k` exponential.
pub struct GrRiemGeodesic {
    base: GrPoint,
    x: RealMatrix,
    ytx: RealMatrix,
    core: RealMatrix,
}

impl GrRiemGeodesic {
    pub fn new(g: &GrTangentHor) -> Self {
        let u = g.base().rep().as_mat();
        let h = g.h();
        let k2 = h.ncols();
        let jhj = jt_mul(&mul_j(h));
        let juj = jt_mul(&mul_j(u));
        let x = hcat(&[&jhj, &(-&juj), &(-u), h]);
        let y = hcat(&[u, h, &jhj, &juj]);
        let zero = RealMatrix::zeros(k2, k2);
        let core = block2(&zero, &(-(sinv(h) * h)), &identity(k2), &zero);
        Self {
            base: g.base().clone(),
            ytx: y.tr_mul(&x),
            x,
            core,
        }
    }
}

impl GrCurve for GrRiemGeodesic {
    fn base(&self) -> &GrPoint {
        &self.base
    }

    fn at(&self, t: f64) -> Result<GrPoint> {
        let k4 = self.core.nrows();
        let k2 = k4 / 2;
        let big = expm(&(&self.ytx * t))?;
        let small = expm(&(&self.core * t))?;
        let out = -(&self.x * big.columns(k4, k4) * small.columns(0, k2));
        Ok(wrap(out))
    }
}

/// Cayley retraction on the horizontal lift, `−U + (tH + 2U)(t²/4 H⁺H + I)⁻¹`.
pub struct GrCayleyCurve {
    base: GrPoint,
    inner: CayleyCurve,
}

impl GrCayleyCurve {
    pub fn new(g: &GrTangentHor) -> Self {
        let u = g.base().rep().clone();
        let h = g.h().clone();
        let a = RealMatrix::zeros(h.ncols(), h.ncols());
        let d = StTangent::from_raw_parts(u, h.clone(), a, h);
        Self {
            base: g.base().clone(),
            inner: CayleyCurve::new(&d),
        }
    }
}

impl GrCurve for GrCayleyCurve {
    fn base(&self) -> &GrPoint {
        &self.base
    }

    fn at(&self, t: f64) -> Result<GrPoint> {
        Ok(GrPoint::new(self.inner.at(t)?))
    }
}

/// Pseudo-Riemannian geodesic through the reduced lifted form.
pub fn exp_h_gr(p: &GrPoint, g: &GrTangentHor, t: f64) -> Result<GrPoint> {
    check(p, g, TangentMode::Pseudo)?;
    GrPseudoGeodesic::new(g).at(t)
}

/// Projector form `expm(t[Γ, P]) P expm(−t[Γ, P])` of the pseudo-Riemannian
/// geodesic.
pub fn exp_h_gr_proj(p: &GrPoint, g: &GrTangentHor, t: f64) -> Result<RealMatrix> {
    check(p, g, TangentMode::Pseudo)?;
    let pm = p.projector();
    let gamma = g.bracket();
    let x = (&gamma * pm - pm * &gamma) * t;
    Ok(expm(&x)? * pm * expm(&(-x))?)
}

/// Riemannian geodesic in the reduced `8k`/`4k` form.
pub fn exp_g_gr_reduced(u: &GrPoint, g: &GrTangentHor, t: f64) -> Result<GrPoint> {
    check(u, g, TangentMode::Riem)?;
    GrRiemGeodesic::new(g).at(t)
}

/// Riemannian geodesic `expm(t(Ω̄ − Ω̄ᵀ)) expm(tΩ̄ᵀ) U` with `2n × 2n`
/// exponentials.
pub fn exp_g_gr_full(u: &GrPoint, g: &GrTangentHor, t: f64) -> Result<GrPoint> {
    check(u, g, TangentMode::Riem)?;
    Ok(GrPoint::new(exp_g_st_full(u.rep(), &g.to_st_tangent(), t)?))
}

/// Cayley retraction on the horizontal lift of a pseudo-mode vector.
pub fn cayley_retract_gr(u: &GrPoint, g: &GrTangentHor, t: f64) -> Result<GrPoint> {
    check(u, g, TangentMode::Pseudo)?;
    GrCayleyCurve::new(g).at(t)
}

/// Projector form `cay(t/2 [Γ, P]) P cay(−t/2 [Γ, P])` of the Cayley
/// retraction.
pub fn cayley_retract_gr_proj(p: &GrPoint, g: &GrTangentHor, t: f64) -> Result<RealMatrix> {
    check(p, g, TangentMode::Pseudo)?;
    let pm = p.projector();
    let gamma = g.bracket();
    let x = (&gamma * pm - pm * &gamma) * (0.5 * t);
    Ok(cay(&x)? * pm * cay(&(-x))?)
}
