use super::{ManifoldMode, Objective, Problem, Retraction};
use crate::matfun::{j_mul, jt_mul, mul_j, mul_jt, sinv, RealMatrix};

/// `f(U) = ‖U − A‖_F²`.
#[derive(Debug, Clone)]
pub struct NearestSymplectic {
    pub target: RealMatrix,
}

impl Objective for NearestSymplectic {
    fn value(&self, u: &RealMatrix) -> f64 {
        (u - &self.target).norm_squared()
    }

    fn euclid_grad(&self, u: &RealMatrix) -> RealMatrix {
        (u - &self.target) * 2.0
    }
}

/// `f(U) = ‖S − UU⁺S‖_F²`, a function of the subspace `UU⁺` only.
#[derive(Debug, Clone)]
pub struct SubspaceFit {
    pub data: RealMatrix,
}

impl SubspaceFit {
    fn residual(&self, u: &RealMatrix) -> RealMatrix {
        &self.data - u * (sinv(u) * &self.data)
    }
}

impl Objective for SubspaceFit {
    fn value(&self, u: &RealMatrix) -> f64 {
        self.residual(u).norm_squared()
    }

    /// `−2(R Sᵀ JᵀUJ + J S Rᵀ U Jᵀ)` with `R = S − UU⁺S`.
    fn euclid_grad(&self, u: &RealMatrix) -> RealMatrix {
        let r = self.residual(u);
        let s = &self.data;
        let first = &r * s.transpose() * jt_mul(&mul_j(u));
        let second = mul_jt(&j_mul(&(s * r.tr_mul(u))));
        (first + second) * -2.0
    }
}

/// Nearest symplectic Stiefel matrix to `a`, Riemannian metric, Cayley steps.
pub fn nearest_symplectic_problem(a: RealMatrix) -> Problem {
    Problem::new(
        NearestSymplectic { target: a },
        ManifoldMode::StiefelG,
        Retraction::Cayley,
    )
}

/// Best `2k`-dimensional symplectic subspace for the columns of `s`, on the
/// Grassmann manifold with Cayley steps.
pub fn subspace_fit_problem(s: RealMatrix) -> Problem {
    Problem::new(
        SubspaceFit { data: s },
        ManifoldMode::GrassmannG,
        Retraction::Cayley,
    )
}
