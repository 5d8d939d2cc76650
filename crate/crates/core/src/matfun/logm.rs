use super::{check_finite, identity, norm_1, Lu, RealMatrix};
use crate::error::{Error, Result};

const SQRT_MAX_ITERS: usize = 100;
const LOG_MAX_ROOTS: usize = 64;
/// Square roots are taken until `‖A − I‖₁` drops below this bound, where the
/// 8-point Gauss–Legendre (≡ [8/8] Padé) approximant of `log(I + X)` is
/// accurate to unit roundoff.
const LOG_PADE_RADIUS: f64 = 0.25;

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn require_square(x: &RealMatrix, what: &str) -> Result<()> {
    if x.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} needs a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )))
    }
}

/// A real matrix with a negative determinant has an odd number of negative
/// real eigenvalues, and a singular one has a zero eigenvalue; neither has a
/// principal square root or logarithm.
fn domain_precheck(x: &RealMatrix, what: &'static str) -> Result<()> {
    let lu = Lu::new(x, what).map_err(|e| match e {
        Error::Singular(_) => Error::Domain(format!("{what}: matrix is singular")),
        other => other,
    })?;
    if lu.det_sign() < 0.0 {
        return Err(Error::Domain(format!(
            "{what}: negative determinant, spectrum meets the negative real axis"
        )));
    }
    Ok(())
}

/// Principal square root by the determinant-scaled Denman–Beavers iteration.
pub fn sqrtm(x: &RealMatrix) -> Result<RealMatrix> {
    require_square(x, "sqrtm")?;
    check_finite(x, "sqrtm argument")?;
    let n = x.nrows();
    if n == 0 {
        return Ok(x.clone());
    }
    domain_precheck(x, "sqrtm")?;

    let mut y = x.clone();
    let mut z = identity(n);
    let mut scaling = true;
    let mut prev_change = f64::INFINITY;
    for _ in 0..SQRT_MAX_ITERS {
        let ly = Lu::new(&y, "Denman-Beavers iterate").map_err(to_domain)?;
        let lz = Lu::new(&z, "Denman-Beavers iterate").map_err(to_domain)?;
        let mu = if scaling {
            // |det Y det Z|^(-1/(2n))
            (-(ly.log_abs_det() + lz.log_abs_det()) / (2.0 * n as f64)).exp()
        } else {
            1.0
        };
        let y_next = (&y * mu + lz.inverse() / mu) * 0.5;
        let z_next = (&z * mu + ly.inverse() / mu) * 0.5;
        check_finite(&y_next, "Denman-Beavers iterate")?;
        let change = (&y_next - &y).norm() / y_next.norm();
        y = y_next;
        z = z_next;
        if change < 1e-2 {
            scaling = false;
        }
        if change <= 1e-14 || (change <= 1e-10 && change >= 0.5 * prev_change) {
            return verify_root(x, y);
        }
        prev_change = change;
    }
    Err(Error::Convergence(
        "Denman-Beavers square root",
        SQRT_MAX_ITERS,
    ))
}

fn to_domain(e: Error) -> Error {
    match e {
        Error::Singular(what) => Error::Domain(format!("{what} became singular")),
        other => other,
    }
}

fn verify_root(x: &RealMatrix, y: RealMatrix) -> Result<RealMatrix> {
    let residual = (&y * &y - x).norm();
    let tol = 1e-8 * x.norm();
    if residual > tol {
        return Err(Error::Domain(format!(
            "square root residual {residual:e} exceeds {tol:e}"
        )));
    }
    Ok(y)
}

/// Principal matrix logarithm by inverse scaling and squaring: repeated
/// principal square roots bring the argument near the identity, an 8-point
/// Gauss–Legendre rule evaluates `log(I + X)`, and the result is scaled back
/// by `2^s`.
pub fn logm(x: &RealMatrix) -> Result<RealMatrix> {
    require_square(x, "logm")?;
    check_finite(x, "logm argument")?;
    let n = x.nrows();
    if n == 0 {
        return Ok(x.clone());
    }
    domain_precheck(x, "logm")?;
    let eye = identity(n);

    let mut a = x.clone();
    let mut roots = 0;
    while norm_1(&(&a - &eye)) > LOG_PADE_RADIUS {
        if roots == LOG_MAX_ROOTS {
            return Err(Error::Convergence("logm square-root recursion", roots));
        }
        a = sqrtm(&a)?;
        roots += 1;
    }
    let d = &a - &eye;
    let mut acc = RealMatrix::zeros(n, n);
    for (node, weight) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        // nodes mapped from [-1, 1] to [0, 1]
        let s = 0.5 * (node + 1.0);
        let denom = &eye + &d * s;
        let term = Lu::new(&denom, "logm quadrature")
            .map_err(to_domain)?
            .solve(&d);
        acc += term * (0.5 * weight);
    }
    Ok(acc * 2f64.powi(roots as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{expm, rand_hamiltonian, Rng};
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> RealMatrix {
        RealMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    #[test]
    fn log_of_identity_is_zero() {
        assert_eq!(logm(&identity(4)).unwrap(), RealMatrix::zeros(4, 4));
    }

    #[test]
    fn log_of_scalar_diagonal() {
        let e = std::f64::consts::E;
        let l = logm(&diag(&[e, e * e])).unwrap();
        assert!((l - diag(&[1.0, 2.0])).norm() <= 1e-13);
    }

    #[test]
    fn log_exp_round_trip_on_hamiltonian() {
        let mut rng = Rng::new(11);
        let om = rand_hamiltonian(&mut rng, 5);
        let om = om.as_mat() * (0.5 / om.as_mat().norm());
        let back = logm(&expm(&om).unwrap()).unwrap();
        assert!((back - &om).norm() <= 1e-9);
    }

    #[test]
    fn exp_log_round_trip_far_from_identity() {
        let mut rng = Rng::new(12);
        let m = rng.normal_matrix(8, 8);
        let spd = m.transpose() * &m + identity(8);
        let back = expm(&logm(&spd).unwrap()).unwrap();
        assert!((&back - &spd).norm() <= 1e-10 * spd.norm());
    }

    #[test]
    fn log_rejects_negative_eigenvalue() {
        assert!(matches!(logm(&diag(&[-1.0, 2.0])), Err(Error::Domain(_))));
        assert!(matches!(logm(&diag(&[0.0, 2.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn sqrt_basic_cases() {
        assert!((sqrtm(&identity(3)).unwrap() - identity(3)).norm() <= 1e-15);
        let r = sqrtm(&diag(&[4.0, 9.0])).unwrap();
        assert!((r - diag(&[2.0, 3.0])).norm() <= 1e-14);
    }

    #[test]
    fn sqrt_of_gram_matrix() {
        let mut rng = Rng::new(13);
        let m = rng.normal_matrix(10, 10) + identity(10) * 4.0;
        let g = m.transpose() * &m;
        let r = sqrtm(&g).unwrap();
        assert!((&r * &r - &g).norm() <= 1e-10 * g.norm());
    }

    #[test]
    fn sqrt_of_rotation_by_less_than_pi() {
        // principal root of a rotation by θ is the rotation by θ/2
        let th: f64 = 2.0;
        let rot = |a: f64| RealMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]);
        let r = sqrtm(&rot(th)).unwrap();
        assert!((r - rot(th / 2.0)).norm() <= 1e-12);
    }

    #[test]
    fn sqrt_rejects_negative_determinant() {
        assert!(matches!(sqrtm(&diag(&[-4.0, 1.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn sqrt_fails_on_even_negative_pair() {
        // det > 0 but both eigenvalues negative: no real principal root
        assert!(sqrtm(&diag(&[-4.0, -1.0])).is_err());
    }
}
