//! Curves on the symplectic Stiefel manifold. Each curve is built once from
//! `(U, Δ)`, keeping the `t`-independent cores, and then evaluated at any `t`.

use super::{gram_inverse, omega_bar, omega_tilde, StPoint, StTangent};
use crate::error::{Error, Result};
use crate::matfun::{
    block2, cay, expm, hcat, identity, j_mul, jt_mul, mul_j, sinv, solve_right, RealMatrix,
};

/// A curve `t ↦ γ(t)` on `SpSt(2n, 2k)` with `γ(0) = U`.
pub trait StCurve: Send + Sync {
    fn base(&self) -> &StPoint;
    fn at(&self, t: f64) -> Result<StPoint>;
}

fn check_base(u: &StPoint, d: &StTangent) -> Result<()> {
    if d.base() == u {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

/// Geodesic of the pseudo-Riemannian metric,
/// `[U, ½UA + H] expm(t[[½A, ¼A² − H⁺H], [I, ½A]]) [I; 0]`.
pub struct PseudoGeodesic {
    base: StPoint,
    left: RealMatrix,
    core: RealMatrix,
}

impl PseudoGeodesic {
    pub fn new(d: &StTangent) -> Self {
        let u = d.base().as_mat();
        let (a, h) = (d.a(), d.h());
        let k2 = a.nrows();
        let half_a = a * 0.5;
        let hph = sinv(h) * h;
        let core = block2(&half_a, &(a * a * 0.25 - hph), &identity(k2), &half_a);
        let left = hcat(&[u, &(u * &half_a + h)]);
        Self {
            base: d.base().clone(),
            left,
            core,
        }
    }
}

impl StCurve for PseudoGeodesic {
    fn base(&self) -> &StPoint {
        &self.base
    }

    fn at(&self, t: f64) -> Result<StPoint> {
        let k2 = self.core.nrows() / 2;
        let e = expm(&(&self.core * t))?;
        Ok(StPoint::from_unchecked(&self.left * e.columns(0, k2)))
    }
}

/// Geodesic of the right-invariant Riemannian metric in the `8k`/`4k` form
/// `[tY, −X] expm(M₈(t)) [0; I] expm(tYᵀX) [0; I]`.
pub struct RiemGeodesic {
    base: StPoint,
    x: RealMatrix,
    y: RealMatrix,
    xtx: RealMatrix,
    xty: RealMatrix,
    ytx: RealMatrix,
    yty: RealMatrix,
}

impl RiemGeodesic {
    pub fn new(d: &StTangent) -> Result<Self> {
        let u = d.base().as_mat();
        let delta = d.as_mat();
        let g = gram_inverse(u)?;
        let usinv = sinv(u);

        // Ā = J UᵀΔG J + GΔᵀU − G(ΔᵀJᵀU)G J
        let t1 = mul_j(&j_mul(&(u.tr_mul(delta) * &g)));
        let t2 = &g * delta.tr_mul(u);
        let t3 = mul_j(&(&g * delta.tr_mul(&jt_mul(u)) * &g));
        let abar = t1 + t2 - t3;
        // H̄ = (I − UU⁺) JΔG J
        let z = mul_j(&(j_mul(delta) * &g));
        let hbar = &z - u * (&usinv * &z);
        let dbar = u * &abar + &hbar;

        let x = hcat(&[&(u * &abar * 0.5 + &hbar), &(-u)]);
        let dbar_s = sinv(&dbar);
        let y_right = (&dbar_s - (&dbar_s * u) * &usinv * 0.5).transpose();
        let y = hcat(&[&mul_j(&jt_mul(u)), &y_right]);
        Ok(Self {
            base: d.base().clone(),
            xtx: x.tr_mul(&x),
            xty: x.tr_mul(&y),
            ytx: y.tr_mul(&x),
            yty: y.tr_mul(&y),
            x,
            y,
        })
    }
}

impl StCurve for RiemGeodesic {
    fn base(&self) -> &StPoint {
        &self.base
    }

    fn at(&self, t: f64) -> Result<StPoint> {
        let k4 = self.xtx.nrows();
        let k2 = k4 / 2;
        // Ŷᵀ X̂ for X̂ = [tY, −X], Ŷ = [X, tY]
        let m8 = block2(
            &(&self.xty * t),
            &(-&self.xtx),
            &(&self.yty * (t * t)),
            &(&self.ytx * (-t)),
        );
        let e8 = expm(&m8)?;
        let e4 = expm(&(&self.ytx * t))?;
        let inner = e8.columns(k4, k4) * e4.columns(k2, k2);
        let out = &self.y * inner.rows(0, k4) * t - &self.x * inner.rows(k4, k4);
        Ok(StPoint::from_unchecked(out))
    }
}

/// Cayley retraction `−U + (tH + 2U)(t²/4 H⁺H − t/2 A + I)⁻¹`.
pub struct CayleyCurve {
    base: StPoint,
    a: RealMatrix,
    h: RealMatrix,
    hph: RealMatrix,
}

impl CayleyCurve {
    pub fn new(d: &StTangent) -> Self {
        Self {
            base: d.base().clone(),
            a: d.a().clone(),
            h: d.h().clone(),
            hph: sinv(d.h()) * d.h(),
        }
    }
}

impl StCurve for CayleyCurve {
    fn base(&self) -> &StPoint {
        &self.base
    }

    fn at(&self, t: f64) -> Result<StPoint> {
        let u = self.base.as_mat();
        let theta = &self.hph * (0.25 * t * t) - &self.a * (0.5 * t) + identity(self.a.nrows());
        let num = &self.h * t + u * 2.0;
        let out = solve_right(&num, &theta, "Cayley retraction core")? - u;
        Ok(StPoint::from_unchecked(out))
    }
}

/// Quasi-geodesic retraction
/// `[U, tΔ] expm([[tA, −t²Δ⁺Δ], [I, tA]]) [I; 0] expm(−tA)`.
pub struct QuasiGeodesic {
    base: StPoint,
    delta: RealMatrix,
    a: RealMatrix,
    dpd: RealMatrix,
}

impl QuasiGeodesic {
    pub fn new(d: &StTangent) -> Self {
        Self {
            base: d.base().clone(),
            delta: d.as_mat().clone(),
            a: d.a().clone(),
            dpd: sinv(d.as_mat()) * d.as_mat(),
        }
    }
}

impl StCurve for QuasiGeodesic {
    fn base(&self) -> &StPoint {
        &self.base
    }

    fn at(&self, t: f64) -> Result<StPoint> {
        let k2 = self.a.nrows();
        let ta = &self.a * t;
        let m = block2(&ta, &(&self.dpd * (-t * t)), &identity(k2), &ta);
        let e = expm(&m)?;
        let u = self.base.as_mat();
        let lead = u * e.view((0, 0), (k2, k2)) + &self.delta * e.view((k2, 0), (k2, k2)) * t;
        Ok(StPoint::from_unchecked(lead * expm(&(-ta))?))
    }
}

/// Pseudo-Riemannian geodesic in the reduced `4k × 4k` form.
pub fn exp_h_st_reduced(u: &StPoint, d: &StTangent, t: f64) -> Result<StPoint> {
    check_base(u, d)?;
    PseudoGeodesic::new(d).at(t)
}

/// Pseudo-Riemannian geodesic `expm(tΩ̃)U` with the full `2n × 2n` exponential.
pub fn exp_h_st_full(u: &StPoint, d: &StTangent, t: f64) -> Result<StPoint> {
    let om = omega_tilde(u, d)?;
    Ok(StPoint::from_unchecked(
        expm(&(om.as_mat() * t))? * u.as_mat(),
    ))
}

/// Riemannian geodesic in the reduced `8k`/`4k` form.
pub fn exp_g_st_reduced(u: &StPoint, d: &StTangent, t: f64) -> Result<StPoint> {
    check_base(u, d)?;
    RiemGeodesic::new(d)?.at(t)
}

/// Riemannian geodesic `expm(t(Ω̄ − Ω̄ᵀ)) expm(tΩ̄ᵀ) U` with `2n × 2n`
/// exponentials.
pub fn exp_g_st_full(u: &StPoint, d: &StTangent, t: f64) -> Result<StPoint> {
    let om = omega_bar(u, d)?.into_mat();
    let omt = om.transpose();
    let first = expm(&((&om - &omt) * t))?;
    let second = expm(&(omt * t))?;
    Ok(StPoint::from_unchecked(first * second * u.as_mat()))
}

/// Cayley retraction `R_U(tΔ)` through the `2k × 2k` core.
pub fn cayley_retract(u: &StPoint, d: &StTangent, t: f64) -> Result<StPoint> {
    check_base(u, d)?;
    CayleyCurve::new(d).at(t)
}

/// Cayley retraction `cay(t/2 Ω̃) U` with the full `2n × 2n` transform.
pub fn cayley_retract_full(u: &StPoint, d: &StTangent, t: f64) -> Result<StPoint> {
    let om = omega_tilde(u, d)?;
    Ok(StPoint::from_unchecked(
        cay(&(om.as_mat() * (0.5 * t)))? * u.as_mat(),
    ))
}

/// Quasi-geodesic retraction `R_U(tΔ)`.
pub fn quasi_geodesic_retract(u: &StPoint, d: &StTangent, t: f64) -> Result<StPoint> {
    check_base(u, d)?;
    QuasiGeodesic::new(d).at(t)
}
