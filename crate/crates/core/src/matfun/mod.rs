//! Dense matrix kernels shared by every manifold: implicit Poisson-matrix
//! products, the symplectic inverse, matrix exponential, logarithm, square
//! root, the Cayley map and seeded random instances.
//!
//! The Poisson matrix `J_{2m} = [[0, I_m], [-I_m, 0]]` is never formed; all
//! products with it are block swaps with a sign flip.

mod cayley;
mod expm;
mod logm;
pub mod random;

pub use cayley::{cay, cay_inv};
pub use expm::expm;
pub use logm::{logm, sqrtm};
pub use random::{rand_hamiltonian, rand_stiefel_point, rand_stiefel_tangent, CayScale, Rng};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type RealMatrix = DMatrix<f64>;

/// Tolerance on `‖Ω⁺ + Ω‖_F / ‖Ω‖_F` accepted by [`HamMatrix::new`].
pub const HAM_TOL: f64 = 1e-12;

/// Relative pivot threshold below which a linear solve is declared singular.
pub const PIVOT_TOL: f64 = 1e-13;

/// Rejects matrices containing NaN or infinite entries.
pub fn check_finite(m: &RealMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Applies the Poisson matrix of matching even size to `m`.
///
/// Returns `J m`, `Jᵀ m`, `m J` or `m Jᵀ` depending on `side` and
/// `transpose`.
pub fn poisson_apply(side: Side, transpose: bool, m: &RealMatrix) -> Result<RealMatrix> {
    match side {
        Side::Left => {
            if !m.nrows().is_multiple_of(2) {
                return Err(Error::Dimension(format!(
                    "left Poisson product needs an even row count, got {}",
                    m.nrows()
                )));
            }
            Ok(if transpose { jt_mul(m) } else { j_mul(m) })
        }
        Side::Right => {
            if !m.ncols().is_multiple_of(2) {
                return Err(Error::Dimension(format!(
                    "right Poisson product needs an even column count, got {}",
                    m.ncols()
                )));
            }
            Ok(if transpose { mul_jt(m) } else { mul_j(m) })
        }
    }
}

/// `J m`: top half becomes the bottom half, bottom half becomes minus the top.
pub(crate) fn j_mul(m: &RealMatrix) -> RealMatrix {
    let p = m.nrows() / 2;
    let c = m.ncols();
    let mut out = RealMatrix::zeros(2 * p, c);
    out.rows_mut(0, p).copy_from(&m.rows(p, p));
    out.rows_mut(p, p).copy_from(&(-m.rows(0, p)));
    out
}

/// `Jᵀ m`.
pub(crate) fn jt_mul(m: &RealMatrix) -> RealMatrix {
    let p = m.nrows() / 2;
    let c = m.ncols();
    let mut out = RealMatrix::zeros(2 * p, c);
    out.rows_mut(0, p).copy_from(&(-m.rows(p, p)));
    out.rows_mut(p, p).copy_from(&m.rows(0, p));
    out
}

/// `m J`: `[m1, m2] J = [-m2, m1]`.
pub(crate) fn mul_j(m: &RealMatrix) -> RealMatrix {
    let p = m.ncols() / 2;
    let r = m.nrows();
    let mut out = RealMatrix::zeros(r, 2 * p);
    out.columns_mut(0, p).copy_from(&(-m.columns(p, p)));
    out.columns_mut(p, p).copy_from(&m.columns(0, p));
    out
}

/// `m Jᵀ`: `[m1, m2] Jᵀ = [m2, -m1]`.
pub(crate) fn mul_jt(m: &RealMatrix) -> RealMatrix {
    let p = m.ncols() / 2;
    let r = m.nrows();
    let mut out = RealMatrix::zeros(r, 2 * p);
    out.columns_mut(0, p).copy_from(&m.columns(p, p));
    out.columns_mut(p, p).copy_from(&(-m.columns(0, p)));
    out
}

/// Symplectic inverse `A⁺ = J_{2k}ᵀ Aᵀ J_{2n}` of a `2n × 2k` matrix.
///
/// With `A = [[A11, A12], [A21, A22]]` split into `n × k` blocks this is
/// `[[A22ᵀ, -A12ᵀ], [-A21ᵀ, A11ᵀ]]`, assembled without any multiplication.
pub fn symplectic_inverse(a: &RealMatrix) -> Result<RealMatrix> {
    if !a.nrows().is_multiple_of(2) || !a.ncols().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "symplectic inverse needs even dimensions, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(sinv(a))
}

pub(crate) fn sinv(a: &RealMatrix) -> RealMatrix {
    let n = a.nrows() / 2;
    let k = a.ncols() / 2;
    let mut out = RealMatrix::zeros(2 * k, 2 * n);
    out.view_mut((0, 0), (k, n))
        .copy_from(&a.view((n, k), (n, k)).transpose());
    out.view_mut((0, n), (k, n))
        .copy_from(&(-a.view((0, k), (n, k)).transpose()));
    out.view_mut((k, 0), (k, n))
        .copy_from(&(-a.view((n, 0), (n, k)).transpose()));
    out.view_mut((k, n), (k, n))
        .copy_from(&a.view((0, 0), (n, k)).transpose());
    out
}

/// `tr(X⁺ Y)` for two `2n × 2k` matrices, computed as `⟨X, J Y Jᵀ⟩_F`.
pub(crate) fn sp_trace(x: &RealMatrix, y: &RealMatrix) -> f64 {
    x.dot(&mul_jt(&j_mul(y)))
}

/// Lie-algebra residual `‖Ω⁺ + Ω‖_F`.
pub(crate) fn ham_residual(m: &RealMatrix) -> f64 {
    (sinv(m) + m).norm()
}

/// Feasibility residual `‖U⁺U − I‖_F` of a (candidate) symplectic Stiefel matrix.
pub fn feasibility(u: &RealMatrix) -> f64 {
    let mut g = sinv(u) * u;
    for i in 0..g.nrows() {
        g[(i, i)] -= 1.0;
    }
    g.norm()
}

/// Canonical embedding `E = [[I_{n,k}, 0], [0, I_{n,k}]]`.
pub(crate) fn canonical_e_matrix(n: usize, k: usize) -> RealMatrix {
    let mut e = RealMatrix::zeros(2 * n, 2 * k);
    for i in 0..k {
        e[(i, i)] = 1.0;
        e[(n + i, k + i)] = 1.0;
    }
    e
}

/// Element of `sp(2n, ℝ)`: a Hamiltonian matrix `Ω` with `Ω⁺ = −Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamMatrix {
    mat: RealMatrix,
}

impl HamMatrix {
    /// Wraps `mat` after checking `‖Ω⁺ + Ω‖_F ≤ 1e-12 ‖Ω‖_F`.
    pub fn new(mat: RealMatrix) -> Result<Self> {
        if !mat.is_square() || !mat.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "Hamiltonian matrix must be square of even size, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_finite(&mat, "Hamiltonian matrix")?;
        let residual = ham_residual(&mat);
        let tol = HAM_TOL * mat.norm();
        if residual > tol {
            return Err(Error::Structure {
                what: "Hamiltonian",
                residual,
                tol,
            });
        }
        Ok(Self { mat })
    }

    /// `B − B⁺`, which is Hamiltonian exactly in floating point.
    pub fn from_half(b: &RealMatrix) -> Self {
        Self { mat: b - sinv(b) }
    }

    /// Projection `½(X − X⁺)` onto the Lie algebra.
    pub fn project(x: &RealMatrix) -> Self {
        Self {
            mat: (x - sinv(x)) * 0.5,
        }
    }

    pub(crate) fn from_raw(mat: RealMatrix) -> Self {
        Self { mat }
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

    pub fn scale(&self, s: f64) -> Self {
        Self { mat: &self.mat * s }
    }
}

/// Matrix 1-norm (maximum absolute column sum).
pub(crate) fn norm_1(m: &RealMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix ∞-norm (maximum absolute row sum).
pub(crate) fn norm_inf(m: &RealMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm `‖A‖₂`, the largest singular value.
pub fn spectral_norm(a: &RealMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

pub(crate) fn identity(n: usize) -> RealMatrix {
    RealMatrix::identity(n, n)
}

/// Partially pivoted LU with the crate-wide singularity threshold
/// `|pivot| < 1e-13 ‖A‖_∞`.
pub(crate) struct Lu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    log_abs_det: f64,
    det_sign: f64,
}

impl Lu {
    pub(crate) fn new(a: &RealMatrix, what: &'static str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "{what}: LU needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_finite(a, what)?;
        let scale = norm_inf(a);
        let lu = a.clone().lu();
        let mut log_abs_det = 0.0;
        let mut det_sign = if lu.p().determinant::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        {
            let u = lu.u();
            for i in 0..u.nrows() {
                let p = u[(i, i)];
                if !(p.abs() >= PIVOT_TOL * scale) || p == 0.0 {
                    return Err(Error::Singular(what));
                }
                log_abs_det += p.abs().ln();
                if p < 0.0 {
                    det_sign = -det_sign;
                }
            }
        }
        Ok(Self {
            lu,
            log_abs_det,
            det_sign,
        })
    }

    /// Solves `A X = B`.
    pub(crate) fn solve(&self, b: &RealMatrix) -> RealMatrix {
        self.lu
            .solve(b)
            .expect("pivots were checked at factorization time")
    }

    pub(crate) fn inverse(&self) -> RealMatrix {
        self.lu
            .try_inverse()
            .expect("pivots were checked at factorization time")
    }

    pub(crate) fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    pub(crate) fn det_sign(&self) -> f64 {
        self.det_sign
    }
}

/// `A X = B`.
pub(crate) fn solve(a: &RealMatrix, b: &RealMatrix, what: &'static str) -> Result<RealMatrix> {
    Ok(Lu::new(a, what)?.solve(b))
}

/// `X A = B`, i.e. `B A⁻¹`, via `Aᵀ Xᵀ = Bᵀ`.
pub(crate) fn solve_right(
    b: &RealMatrix,
    a: &RealMatrix,
    what: &'static str,
) -> Result<RealMatrix> {
    Ok(Lu::new(&a.transpose(), what)?
        .solve(&b.transpose())
        .transpose())
}

/// Horizontal concatenation of blocks with equal row counts.
pub(crate) fn hcat(blocks: &[&RealMatrix]) -> RealMatrix {
    let rows = blocks[0].nrows();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.columns_mut(c, b.ncols()).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// `[[a, b], [c, d]]` from four blocks of equal size.
pub(crate) fn block2(a: &RealMatrix, b: &RealMatrix, c: &RealMatrix, d: &RealMatrix) -> RealMatrix {
    let (r, q) = a.shape();
    let mut out = RealMatrix::zeros(2 * r, 2 * q);
    out.view_mut((0, 0), (r, q)).copy_from(a);
    out.view_mut((0, q), (r, q)).copy_from(b);
    out.view_mut((r, 0), (r, q)).copy_from(c);
    out.view_mut((r, q), (r, q)).copy_from(d);
    out
}

/// `‖P − Q‖_F` between two materialized projectors.
pub fn projector_distance(p: &RealMatrix, q: &RealMatrix) -> f64 {
    (p - q).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_j(p: usize) -> RealMatrix {
        let mut j = RealMatrix::zeros(2 * p, 2 * p);
        for i in 0..p {
            j[(i, p + i)] = 1.0;
            j[(p + i, i)] = -1.0;
        }
        j
    }

    fn sample(r: usize, c: usize, seed: u64) -> RealMatrix {
        let mut rng = Rng::new(seed);
        rng.normal_matrix(r, c)
    }

    #[test]
    fn poisson_left_on_identity_is_j2() {
        let out = poisson_apply(Side::Left, false, &identity(2)).unwrap();
        assert_eq!(
            out,
            RealMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
        );
    }

    #[test]
    fn poisson_involution_and_square() {
        let m = sample(6, 4, 1);
        let jm = poisson_apply(Side::Left, false, &m).unwrap();
        assert_eq!(poisson_apply(Side::Left, true, &jm).unwrap(), m);
        assert_eq!(poisson_apply(Side::Left, false, &jm).unwrap(), -&m);
    }

    #[test]
    fn poisson_matches_explicit_products() {
        let m = sample(6, 4, 2);
        let j6 = explicit_j(3);
        let j4 = explicit_j(2);
        assert_eq!(poisson_apply(Side::Left, false, &m).unwrap(), &j6 * &m);
        assert_eq!(
            poisson_apply(Side::Left, true, &m).unwrap(),
            j6.transpose() * &m
        );
        assert_eq!(poisson_apply(Side::Right, false, &m).unwrap(), &m * &j4);
        assert_eq!(
            poisson_apply(Side::Right, true, &m).unwrap(),
            &m * j4.transpose()
        );
    }

    #[test]
    fn poisson_rejects_odd_dimension() {
        let m = sample(3, 4, 3);
        assert!(matches!(
            poisson_apply(Side::Left, false, &m),
            Err(Error::Dimension(_))
        ));
        assert!(poisson_apply(Side::Right, false, &m).is_ok());
        assert!(symplectic_inverse(&m).is_err());
    }

    #[test]
    fn symplectic_inverse_matches_definition() {
        let a = sample(6, 4, 4);
        let expected = explicit_j(2).transpose() * a.transpose() * explicit_j(3);
        assert_eq!(symplectic_inverse(&a).unwrap(), expected);
    }

    #[test]
    fn canonical_e_and_j_inverse() {
        let e = canonical_e_matrix(4, 2);
        assert_eq!(sinv(&e) * &e, identity(4));
        let j = explicit_j(3);
        assert_eq!(sinv(&j), j.transpose());
    }

    #[test]
    fn symplectic_inverse_equals_dense_inverse_on_group() {
        let mut rng = Rng::new(10);
        let omega = rand_hamiltonian(&mut rng, 10);
        let omega = omega.scale(1.0 / omega.as_mat().norm());
        let m = cay(omega.as_mat()).unwrap();
        assert!((sinv(&m) * &m - identity(20)).norm() <= 1e-10);
        let dense = m.clone().try_inverse().unwrap();
        assert!((sinv(&m) - dense).norm() <= 1e-10);
    }

    #[test]
    fn sp_trace_matches_explicit() {
        let x = sample(6, 4, 5);
        let y = sample(6, 4, 6);
        let direct = (sinv(&x) * &y).trace();
        assert!((sp_trace(&x, &y) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn ham_matrix_rejects_non_hamiltonian() {
        let x = sample(4, 4, 7);
        assert!(HamMatrix::new(x.clone()).is_err());
        let h = HamMatrix::from_half(&x);
        assert_eq!(ham_residual(h.as_mat()), 0.0);
        assert!(HamMatrix::new(h.into_mat()).is_ok());
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -7.0, 1.0]));
        assert!((spectral_norm(&d) - 7.0).abs() < 1e-6);
    }

    #[test]
    fn spectral_norm_close_to_svd() {
        // ‖A‖₂² is the largest eigenvalue of AᵀA
        let a = sample(12, 5, 8);
        let top = (a.transpose() * &a).symmetric_eigenvalues().max();
        assert!((spectral_norm(&a).powi(2) - top).abs() <= 1e-10 * top);
    }

    #[test]
    fn lu_flags_singular() {
        let mut a = sample(4, 4, 9);
        let c0 = a.column(0).clone_owned();
        a.set_column(1, &(c0 * 2.0));
        assert!(matches!(Lu::new(&a, "test"), Err(Error::Singular(_))));
    }
}
