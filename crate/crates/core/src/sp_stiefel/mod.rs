//! The symplectic Stiefel manifold `SpSt(2n, 2k) = {U : U⁺U = I_{2k}}`.
//!
//! Tangent vectors are stored together with their split `Δ = UA + H`, where
//! `A = U⁺Δ` is Hamiltonian and `U⁺H = 0`. Every reduced formula below works
//! on this split and on `2k × 2k` or `4k × 4k` cores.

mod curves;

pub use curves::{
    cayley_retract, cayley_retract_full, exp_g_st_full, exp_g_st_reduced, exp_h_st_full,
    exp_h_st_reduced, quasi_geodesic_retract, CayleyCurve, PseudoGeodesic, QuasiGeodesic,
    RiemGeodesic, StCurve,
};

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::matfun::{
    canonical_e_matrix, check_finite, feasibility, ham_residual, identity, j_mul, jt_mul, mul_j,
    sinv, sp_trace, HamMatrix, RealMatrix,
};

/// Feasibility tolerance `‖U⁺U − I‖_F` accepted by [`StPoint::new`].
pub const POINT_TOL: f64 = 1e-8;
/// Relative tangency tolerance accepted by [`StTangent::new`].
pub const TANGENT_TOL: f64 = 1e-8;

/// A point `U ∈ SpSt(2n, 2k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StPoint {
    mat: RealMatrix,
}

impl StPoint {
    /// Wraps `mat` after checking `‖U⁺U − I‖_F ≤ 1e-8`.
    pub fn new(mat: RealMatrix) -> Result<Self> {
        check_shape(&mat)?;
        check_finite(&mat, "symplectic Stiefel point")?;
        let residual = feasibility(&mat);
        if !(residual <= POINT_TOL) {
            return Err(Error::NotFeasible {
                residual,
                tol: POINT_TOL,
            });
        }
        Ok(Self { mat })
    }

    /// Wraps curve output without re-checking feasibility; the residual of
    /// such points is what the feasibility experiment measures.
    pub(crate) fn from_unchecked(mat: RealMatrix) -> Self {
        Self { mat }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows() / 2
    }

    pub fn k(&self) -> usize {
        self.mat.ncols() / 2
    }

    pub fn as_mat(&self) -> &RealMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> RealMatrix {
        self.mat
    }

    /// `U⁺`.
    pub fn sinv(&self) -> RealMatrix {
        sinv(&self.mat)
    }

    /// `‖U⁺U − I‖_F`.
    pub fn feasibility(&self) -> f64 {
        feasibility(&self.mat)
    }

    /// Representative `UN` of the same symplectic subspace, `N ∈ Sp(2k)`.
    pub fn right_mul(&self, n: &RealMatrix) -> Result<Self> {
        if n.shape() != (self.mat.ncols(), self.mat.ncols()) {
            return Err(Error::Dimension(format!(
                "right factor must be {0}x{0}, got {1}x{2}",
                self.mat.ncols(),
                n.nrows(),
                n.ncols()
            )));
        }
        Ok(Self::from_unchecked(&self.mat * n))
    }
}

fn check_shape(mat: &RealMatrix) -> Result<()> {
    let (r, c) = mat.shape();
    if r % 2 != 0 || c % 2 != 0 || c == 0 || c > r {
        return Err(Error::Dimension(format!(
            "symplectic Stiefel matrices are 2n x 2k with 1 <= k <= n, got {r}x{c}"
        )));
    }
    Ok(())
}

/// A tangent vector `Δ = UA + H` at a symplectic Stiefel point.
#[derive(Debug, Clone, PartialEq)]
pub struct StTangent {
    base: StPoint,
    mat: RealMatrix,
    a: RealMatrix,
    h: RealMatrix,
}

impl StTangent {
    /// Splits `delta` into `A = U⁺Δ` and `H = Δ − UA` and checks that `A` is
    /// Hamiltonian and `U⁺H` vanishes, both to `1e-8 · max(1, ‖Δ‖_F)` plus
    /// the feasibility residual of the base.
    pub fn new(base: StPoint, delta: RealMatrix) -> Result<Self> {
        if delta.shape() != base.mat.shape() {
            return Err(Error::Dimension(format!(
                "tangent shape {:?} does not match base {:?}",
                delta.shape(),
                base.mat.shape()
            )));
        }
        check_finite(&delta, "symplectic Stiefel tangent")?;
        let usinv = base.sinv();
        let a = &usinv * &delta;
        let h = &delta - &base.mat * &a;
        let scale = delta.norm().max(1.0);
        let tol = (TANGENT_TOL + base.feasibility()) * scale;
        let residual = ham_residual(&a).max((usinv * &h).norm());
        if !(residual <= tol) {
            return Err(Error::NotTangent { residual, tol });
        }
        Ok(Self {
            base,
            mat: delta,
            a,
            h,
        })
    }

    /// `Δ = UA + H` from its parts; `a` must be Hamiltonian and `U⁺h = 0`.
    pub fn from_parts(base: StPoint, a: RealMatrix, h: RealMatrix) -> Result<Self> {
        let k2 = base.mat.ncols();
        if a.shape() != (k2, k2) || h.shape() != base.mat.shape() {
            return Err(Error::Dimension(
                "tangent parts have the wrong shape".into(),
            ));
        }
        let delta = &base.mat * &a + &h;
        let scale = delta.norm().max(1.0);
        let tol = (TANGENT_TOL + base.feasibility()) * scale;
        let residual = ham_residual(&a).max((base.sinv() * &h).norm());
        if !(residual <= tol) {
            return Err(Error::NotTangent { residual, tol });
        }
        Ok(Self {
            base,
            mat: delta,
            a,
            h,
        })
    }

    pub(crate) fn from_raw_parts(
        base: StPoint,
        mat: RealMatrix,
        a: RealMatrix,
        h: RealMatrix,
    ) -> Self {
        Self { base, mat, a, h }
    }

    pub fn zero(base: StPoint) -> Self {
        let (r, c) = base.mat.shape();
        Self {
            mat: RealMatrix::zeros(r, c),
            a: RealMatrix::zeros(c, c),
            h: RealMatrix::zeros(r, c),
            base,
        }
    }

    pub fn base(&self) -> &StPoint {
        &self.base
    }

    pub fn as_mat(&self) -> &RealMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> RealMatrix {
        self.mat
    }

    /// `A = U⁺Δ`.
    pub fn a(&self) -> &RealMatrix {
        &self.a
    }

    /// `H = Δ − UA`.
    pub fn h(&self) -> &RealMatrix {
        &self.h
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            mat: &self.mat * s,
            a: &self.a * s,
            h: &self.h * s,
        }
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }
}

pub(crate) fn same_base(d1: &StTangent, d2: &StTangent) -> Result<()> {
    if d1.base == d2.base {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

/// `(UᵀU)⁻¹` through a Cholesky factorization.
pub(crate) fn gram_inverse(u: &RealMatrix) -> Result<RealMatrix> {
    Cholesky::new(u.tr_mul(u))
        .map(|c| c.inverse())
        .ok_or(Error::Singular("Gram matrix U^T U"))
}

/// The canonical point `E = [[I_{n,k}, 0], [0, I_{n,k}]]`.
pub fn canonical_e(n: usize, k: usize) -> Result<StPoint> {
    if k == 0 || k > n {
        return Err(Error::Dimension(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    Ok(StPoint::from_unchecked(canonical_e_matrix(n, k)))
}

/// Projection of an ambient `W` onto `T_U`: `A = ½(U⁺W − (U⁺W)⁺)`,
/// `H = (I − UU⁺)W`.
pub fn tangent_from_ambient(u: &StPoint, w: &RealMatrix) -> Result<StTangent> {
    if w.shape() != u.mat.shape() {
        return Err(Error::Dimension(format!(
            "ambient shape {:?} does not match base {:?}",
            w.shape(),
            u.mat.shape()
        )));
    }
    let usw = u.sinv() * w;
    let a = HamMatrix::project(&usw).into_mat();
    let h = w - &u.mat * usw;
    let delta = &u.mat * &a + &h;
    Ok(StTangent::from_raw_parts(u.clone(), delta, a, h))
}

/// Factors `X = [½UA + H, −U]` and `Y` with `Yᵀ = [U⁺; Δ⁺(I − ½UU⁺)]`, so
/// that `Ω̃ = XYᵀ`.
pub fn omega_tilde_factors(d: &StTangent) -> (RealMatrix, RealMatrix) {
    let u = &d.base.mat;
    let x = crate::matfun::hcat(&[&(u * &d.a * 0.5 + &d.h), &(-u)]);
    let dsinv = sinv(&d.mat);
    let yt_bottom = &dsinv - (&dsinv * u) * sinv(u) * 0.5;
    let y = crate::matfun::hcat(&[&sinv(u).transpose(), &yt_bottom.transpose()]);
    (x, y)
}

/// `Ω̃ = (I − ½UU⁺)ΔU⁺ − UΔ⁺(I − ½UU⁺)`, materialized as `B − B⁺` with
/// `B = (I − ½UU⁺)ΔU⁺`.
pub fn omega_tilde(u: &StPoint, d: &StTangent) -> Result<HamMatrix> {
    if d.base != *u {
        return Err(Error::BaseMismatch);
    }
    // (I − ½UU⁺)Δ = ½UA + H
    let left = &u.mat * &d.a * 0.5 + &d.h;
    Ok(HamMatrix::from_half(&(left * u.sinv())))
}

/// `tr(Δ₁⁺(I − ½UU⁺)Δ₂)`, indefinite.
pub fn metric_h_st(d1: &StTangent, d2: &StTangent) -> Result<f64> {
    same_base(d1, d2)?;
    // Δ₁⁺UU⁺Δ₂ = A₁⁺A₂
    Ok(sp_trace(&d1.mat, &d2.mat) - 0.5 * sp_trace(&d1.a, &d2.a))
}

/// `tr(Δ₁ᵀ(I − ½JᵀUGUᵀJ)Δ₂G)` with `G = (UᵀU)⁻¹`.
pub fn metric_g_st(d1: &StTangent, d2: &StTangent) -> Result<f64> {
    same_base(d1, d2)?;
    let u = &d1.base.mat;
    let g = gram_inverse(u)?;
    Ok(metric_g_with(u, &g, &d1.mat, &d2.mat))
}

/// Same as [`metric_g_st`] with a precomputed `G = (UᵀU)⁻¹`.
pub(crate) fn metric_g_with(
    u: &RealMatrix,
    g: &RealMatrix,
    d1: &RealMatrix,
    d2: &RealMatrix,
) -> f64 {
    let w1 = u.tr_mul(&j_mul(d1));
    let w2 = u.tr_mul(&j_mul(d2));
    d1.dot(&(d2 * g)) - 0.5 * w1.dot(&(g * w2 * g))
}

/// Horizontal lift `Ω̄ = ΔGUᵀ + JUGΔᵀ(I − JᵀUGUᵀJ)J` for the Riemannian
/// metric, checked to be Hamiltonian and then projected onto `sp(2n)`.
pub fn omega_bar(u: &StPoint, d: &StTangent) -> Result<HamMatrix> {
    if d.base != *u {
        return Err(Error::BaseMismatch);
    }
    let um = &u.mat;
    let g = gram_inverse(um)?;
    let first = &d.mat * &g * um.transpose();
    // Δᵀ(I − JᵀUGUᵀJ)J = ΔᵀJ − (ΔᵀJᵀU) G (UᵀJ J)
    let dt = d.mat.transpose();
    let dtj = mul_j(&dt);
    let dtjtu = dt * jt_mul(um);
    let ut_jj = -um.transpose();
    let inner = dtj - dtjtu * &g * ut_jj;
    let second = j_mul(&(um * &g * inner));
    let om = first + second;
    let residual = ham_residual(&om);
    let tol = 1e-8 * om.norm().max(1.0);
    if !(residual <= tol) {
        return Err(Error::Structure {
            what: "horizontal lift for the Riemannian metric",
            residual,
            tol,
        });
    }
    Ok(HamMatrix::project(&om))
}

/// Riemannian gradient `∇f UᵀU + JU∇fᵀJU` for the right-invariant metric.
pub fn grad_g_st(u: &StPoint, egrad: &RealMatrix) -> Result<StTangent> {
    if egrad.shape() != u.mat.shape() {
        return Err(Error::Dimension(format!(
            "Euclidean gradient shape {:?} does not match base {:?}",
            egrad.shape(),
            u.mat.shape()
        )));
    }
    let um = &u.mat;
    let first = egrad * um.tr_mul(um);
    let second = j_mul(&(um * (egrad.transpose() * j_mul(um))));
    StTangent::new(u.clone(), first + second)
}

/// Closed-form inverse of the Cayley retraction:
/// `A = 2((I + V⁺U)⁻¹ − (I + U⁺V)⁻¹)`, `H = 2((V + U)(I + U⁺V)⁻¹ − U)`.
pub fn cayley_inverse(u: &StPoint, v: &StPoint) -> Result<StTangent> {
    if u.mat.shape() != v.mat.shape() {
        return Err(Error::Dimension(
            "points live on different manifolds".into(),
        ));
    }
    let k2 = u.mat.ncols();
    let eye = identity(k2);
    let upv = u.sinv() * &v.mat;
    let vpu = v.sinv() * &u.mat;
    let m1 = &eye + &upv;
    let m2 = &eye + &vpu;
    let out_of_domain = |_| Error::OutOfDomain("I + U^+V is singular");
    let inv1 = crate::matfun::Lu::new(&m1, "I + U^+V")
        .map_err(out_of_domain)?
        .inverse();
    let inv2 = crate::matfun::Lu::new(&m2, "I + V^+U")
        .map_err(out_of_domain)?
        .inverse();
    let a = (inv2 - &inv1) * 2.0;
    let h = ((&v.mat + &u.mat) * &inv1 - &u.mat) * 2.0;
    let delta = &u.mat * &a + &h;
    Ok(StTangent::from_raw_parts(u.clone(), delta, a, h))
}
