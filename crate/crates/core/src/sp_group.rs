//! The real symplectic group `Sp(2n)`: the bi-invariant pseudo-Riemannian
//! metric `h`, the right-invariant Riemannian metric `g`, their geodesics and
//! the Riemannian gradient for `g`.

use crate::error::{Error, Result};
use crate::matfun::{
    check_finite, expm, feasibility, ham_residual, j_mul, sinv, sp_trace, RealMatrix,
};

/// Feasibility tolerance `‖M⁺M − I‖_F` accepted by [`SympMatrix::new`].
pub const GROUP_TOL: f64 = 1e-8;

/// A `2n × 2n` symplectic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SympMatrix {
    mat: RealMatrix,
}

impl SympMatrix {
    pub fn new(mat: RealMatrix) -> Result<Self> {
        if !mat.is_square() || !mat.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "symplectic matrix must be square of even size, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_finite(&mat, "symplectic matrix")?;
        let residual = feasibility(&mat);
        if residual > GROUP_TOL {
            return Err(Error::NotFeasible {
                residual,
                tol: GROUP_TOL,
            });
        }
        Ok(Self { mat })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: RealMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows() / 2
    }

    pub fn as_mat(&self) -> &RealMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> RealMatrix {
        self.mat
    }

    pub fn inverse(&self) -> RealMatrix {
        sinv(&self.mat)
    }
}

/// Tangent vector `X` at `M`, stored in ambient form.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTangent {
    base: SympMatrix,
    mat: RealMatrix,
}

impl GroupTangent {
    /// Checks that `M⁺X` is Hamiltonian to `1e-8 · max(1, ‖X‖_F)`.
    pub fn new(base: SympMatrix, mat: RealMatrix) -> Result<Self> {
        if mat.shape() != base.mat.shape() {
            return Err(Error::Dimension(format!(
                "tangent shape {:?} does not match base {:?}",
                mat.shape(),
                base.mat.shape()
            )));
        }
        check_finite(&mat, "group tangent")?;
        let omega = base.inverse() * &mat;
        let residual = ham_residual(&omega);
        let tol = GROUP_TOL * mat.norm().max(1.0);
        if residual > tol {
            return Err(Error::NotTangent { residual, tol });
        }
        Ok(Self { base, mat })
    }

    /// `X = MΩ`; tangent by construction when `Ω` is Hamiltonian.
    pub fn from_algebra(base: SympMatrix, omega: &crate::matfun::HamMatrix) -> Result<Self> {
        if omega.as_mat().shape() != base.mat.shape() {
            return Err(Error::Dimension(
                "Lie algebra element has the wrong size".into(),
            ));
        }
        let mat = base.as_mat() * omega.as_mat();
        Ok(Self { base, mat })
    }

    pub fn base(&self) -> &SympMatrix {
        &self.base
    }

    pub fn as_mat(&self) -> &RealMatrix {
        &self.mat
    }

    /// `Ω = M⁺X`.
    pub fn omega(&self) -> RealMatrix {
        self.base.inverse() * &self.mat
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            mat: &self.mat * s,
        }
    }
}

fn same_base(x1: &GroupTangent, x2: &GroupTangent) -> Result<()> {
    if x1.base == x2.base {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

/// `h_M(X₁, X₂) = ½ tr(X₁⁺X₂)`. Indefinite.
pub fn metric_h(x1: &GroupTangent, x2: &GroupTangent) -> Result<f64> {
    same_base(x1, x2)?;
    Ok(0.5 * sp_trace(&x1.mat, &x2.mat))
}

/// `g_M(X₁, X₂) = ½ tr((X₁M⁺)ᵀ X₂M⁺)`.
pub fn metric_g(x1: &GroupTangent, x2: &GroupTangent) -> Result<f64> {
    same_base(x1, x2)?;
    let minv = x1.base.inverse();
    Ok(0.5 * (&x1.mat * &minv).dot(&(&x2.mat * &minv)))
}

/// One-parameter subgroup `M expm(tΩ)` with `Ω = M⁺X`.
pub fn exp_h(m: &SympMatrix, x: &GroupTangent, t: f64) -> Result<SympMatrix> {
    if x.base != *m {
        return Err(Error::BaseMismatch);
    }
    let e = expm(&(x.omega() * t))?;
    Ok(SympMatrix { mat: &m.mat * e })
}

/// Riemannian geodesic `expm(t(W − Wᵀ)) expm(tWᵀ) M` with `W = XM⁺`.
pub fn exp_g(m: &SympMatrix, x: &GroupTangent, t: f64) -> Result<SympMatrix> {
    if x.base != *m {
        return Err(Error::BaseMismatch);
    }
    let w = &x.mat * m.inverse();
    let wt = w.transpose();
    let first = expm(&((&w - &wt) * t))?;
    let second = expm(&(wt * t))?;
    Ok(SympMatrix {
        mat: first * second * &m.mat,
    })
}

/// Riemannian gradient for `g`: `∇f MᵀM + J M ∇fᵀ J M`.
pub fn grad_g(m: &SympMatrix, egrad: &RealMatrix) -> Result<GroupTangent> {
    if egrad.shape() != m.mat.shape() {
        return Err(Error::Dimension(format!(
            "Euclidean gradient shape {:?} does not match base {:?}",
            egrad.shape(),
            m.mat.shape()
        )));
    }
    let mm = &m.mat;
    let first = egrad * (mm.transpose() * mm);
    let second = j_mul(&(mm * egrad.transpose() * j_mul(mm)));
    Ok(GroupTangent {
        base: m.clone(),
        mat: first + second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{cay, rand_hamiltonian, HamMatrix, Rng};

    fn rand_group(rng: &mut Rng, n: usize) -> SympMatrix {
        let om = rand_hamiltonian(rng, n);
        let om = om.as_mat() / om.as_mat().norm();
        SympMatrix::new(cay(&om).unwrap()).unwrap()
    }

    fn rand_tangent(rng: &mut Rng, m: &SympMatrix) -> GroupTangent {
        let om = rand_hamiltonian(rng, m.n());
        let om = om.scale(1.0 / om.as_mat().norm());
        GroupTangent::from_algebra(m.clone(), &om).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rejects_non_symplectic() {
        let mut rng = Rng::new(1);
        assert!(matches!(
            SympMatrix::new(rng.normal_matrix(4, 4)),
            Err(Error::NotFeasible { .. })
        ));
        let m = rand_group(&mut rng, 2);
        assert!(matches!(
            GroupTangent::new(m, rng.normal_matrix(4, 4)),
            Err(Error::NotTangent { .. })
        ));
    }

    #[test]
    fn h_vanishes_on_nilpotent_direction() {
        let mut rng = Rng::new(2);
        let m = rand_group(&mut rng, 3);
        let mut om = RealMatrix::zeros(6, 6);
        for i in 0..3 {
            om[(i, 3 + i)] = 1.0;
        }
        let x = GroupTangent::from_algebra(m, &HamMatrix::new(om).unwrap()).unwrap();
        assert!(metric_h(&x, &x).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn h_along_poisson_direction_is_n() {
        let mut rng = Rng::new(3);
        let n = 4;
        let m = rand_group(&mut rng, n);
        let j = j_mul(&RealMatrix::identity(2 * n, 2 * n));
        let x = GroupTangent::from_algebra(m, &HamMatrix::new(j).unwrap()).unwrap();
        assert!(rel(metric_h(&x, &x).unwrap(), n as f64) <= 1e-12);
    }

    #[test]
    fn metrics_are_bilinear_and_check_base() {
        let mut rng = Rng::new(4);
        let m = rand_group(&mut rng, 3);
        let x1 = rand_tangent(&mut rng, &m);
        let x2 = rand_tangent(&mut rng, &m);
        let a = 2.7;
        let lhs = metric_h(&x1.scale(a), &x2).unwrap();
        assert!(rel(lhs, a * metric_h(&x1, &x2).unwrap()) <= 1e-12);
        let lhs = metric_g(&x1.scale(a), &x2).unwrap();
        assert!(rel(lhs, a * metric_g(&x1, &x2).unwrap()) <= 1e-12);
        let other = rand_group(&mut rng, 3);
        let y = rand_tangent(&mut rng, &other);
        assert_eq!(metric_g(&x1, &y), Err(Error::BaseMismatch));
    }

    #[test]
    fn g_at_identity_and_positivity() {
        let mut rng = Rng::new(5);
        let om = rand_hamiltonian(&mut rng, 3);
        let x = GroupTangent::from_algebra(SympMatrix::identity(3), &om).unwrap();
        let g = metric_g(&x, &x).unwrap();
        assert!(rel(g, 0.5 * om.as_mat().norm_squared()) <= 1e-12);
        let m = rand_group(&mut rng, 3);
        let y = rand_tangent(&mut rng, &m);
        let xm = y.as_mat() * m.inverse();
        assert!(rel(metric_g(&y, &y).unwrap(), 0.5 * xm.norm_squared()) <= 1e-12);
    }

    #[test]
    fn g_is_right_invariant() {
        let mut rng = Rng::new(6);
        let m = rand_group(&mut rng, 4);
        let nmat = rand_group(&mut rng, 4);
        let x1 = rand_tangent(&mut rng, &m);
        let x2 = rand_tangent(&mut rng, &m);
        let mn = SympMatrix::new(m.as_mat() * nmat.as_mat()).unwrap();
        let y1 = GroupTangent::new(mn.clone(), x1.as_mat() * nmat.as_mat()).unwrap();
        let y2 = GroupTangent::new(mn, x2.as_mat() * nmat.as_mat()).unwrap();
        let lhs = metric_g(&y1, &y2).unwrap();
        let rhs = metric_g(&x1, &x2).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    fn fd_velocity<F: Fn(f64) -> RealMatrix>(curve: F) -> RealMatrix {
        let eps = 1e-5;
        (curve(eps) - curve(-eps)) / (2.0 * eps)
    }

    #[test]
    fn exp_h_axioms() {
        let mut rng = Rng::new(7);
        let m = rand_group(&mut rng, 5);
        let x = rand_tangent(&mut rng, &m);
        assert!((exp_h(&m, &x, 0.0).unwrap().as_mat() - m.as_mat()).norm() <= 1e-12);
        let v = fd_velocity(|t| exp_h(&m, &x, t).unwrap().into_mat());
        assert!((v - x.as_mat()).norm() <= 1e-6 * x.as_mat().norm());
    }

    #[test]
    fn exp_h_one_parameter_subgroup() {
        let mut rng = Rng::new(8);
        let m = rand_group(&mut rng, 4);
        let x = rand_tangent(&mut rng, &m);
        let (s, t) = (0.7, 1.3);
        let ms = exp_h(&m, &x, s).unwrap();
        let xs = GroupTangent::from_algebra(ms.clone(), &HamMatrix::project(&x.omega())).unwrap();
        let lhs = exp_h(&m, &x, s + t).unwrap();
        let rhs = exp_h(&ms, &xs, t).unwrap();
        assert!((lhs.as_mat() - rhs.as_mat()).norm() <= 1e-10 * lhs.as_mat().norm());
    }

    #[test]
    fn exponentials_stay_symplectic() {
        let mut rng = Rng::new(9);
        let m = rand_group(&mut rng, 20);
        let x = rand_tangent(&mut rng, &m);
        let h = exp_h(&m, &x, 5.0).unwrap();
        assert!(feasibility(h.as_mat()) <= 1e-9);
        let m = SympMatrix::identity(20);
        let x = rand_tangent(&mut rng, &m);
        let g = exp_g(&m, &x, 5.0).unwrap();
        assert!(feasibility(g.as_mat()) <= 1e-9);
    }

    #[test]
    fn exp_g_axioms() {
        let mut rng = Rng::new(10);
        let m = rand_group(&mut rng, 5);
        let x = rand_tangent(&mut rng, &m);
        assert!((exp_g(&m, &x, 0.0).unwrap().as_mat() - m.as_mat()).norm() <= 1e-12);
        let v = fd_velocity(|t| exp_g(&m, &x, t).unwrap().into_mat());
        assert!((v - x.as_mat()).norm() <= 1e-6 * x.as_mat().norm());
    }

    #[test]
    fn exp_g_with_symmetric_direction() {
        // XM⁺ symmetric Hamiltonian-conjugate: take X = SM with S = J·(symmetric)
        // chosen symmetric and Hamiltonian, i.e. S = [[A, B], [B, -A]] with A, B symmetric.
        let mut rng = Rng::new(11);
        let n = 3;
        let a = rng.normal_matrix(n, n);
        let b = rng.normal_matrix(n, n);
        let a = (&a + a.transpose()) * 0.1;
        let b = (&b + b.transpose()) * 0.1;
        let mut s = RealMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&a);
        s.view_mut((0, n), (n, n)).copy_from(&b);
        s.view_mut((n, 0), (n, n)).copy_from(&b);
        s.view_mut((n, n), (n, n)).copy_from(&(-&a));
        let m = rand_group(&mut rng, n);
        let x = GroupTangent::new(m.clone(), &s * m.as_mat()).unwrap();
        let got = exp_g(&m, &x, 1.0).unwrap();
        let want = expm(&s.transpose()).unwrap() * m.as_mat();
        assert!((got.as_mat() - want).norm() <= 1e-12 * got.as_mat().norm());
    }

    #[test]
    fn grad_g_is_metric_compatible() {
        let mut rng = Rng::new(12);
        let m = rand_group(&mut rng, 4);
        let egrad = rng.normal_matrix(8, 8);
        let grad = grad_g(&m, &egrad).unwrap();
        GroupTangent::new(m.clone(), grad.as_mat().clone()).unwrap();
        for _ in 0..20 {
            let x = rand_tangent(&mut rng, &m);
            let lhs = metric_g(&grad, &x).unwrap();
            let rhs = egrad.dot(x.as_mat());
            assert!(rel(lhs, rhs) <= 1e-8, "{lhs} vs {rhs}");
        }
        let zero = grad_g(&m, &RealMatrix::zeros(8, 8)).unwrap();
        assert_eq!(zero.as_mat().norm(), 0.0);
    }

    #[test]
    fn grad_g_matches_directional_derivative() {
        let mut rng = Rng::new(13);
        let m = rand_group(&mut rng, 3);
        let target = rng.normal_matrix(6, 6);
        let f = |p: &RealMatrix| (p - &target).norm_squared();
        let grad = grad_g(&m, &((m.as_mat() - &target) * 2.0)).unwrap();
        for _ in 0..5 {
            let x = rand_tangent(&mut rng, &m);
            let eps = 1e-5;
            let fp = f(exp_g(&m, &x, eps).unwrap().as_mat());
            let fm = f(exp_g(&m, &x, -eps).unwrap().as_mat());
            let slope = (fp - fm) / (2.0 * eps);
            assert!(rel(slope, metric_g(&grad, &x).unwrap()) <= 1e-5);
        }
    }
}
