//! Seeded random instances: Hamiltonian matrices, symplectic Stiefel points
//! and tangent vectors.

use rand::{Rng as _, SeedableRng};
use rand_distr::StandardNormal;
use rand_mt::Mt64;

use super::{canonical_e_matrix, identity, sinv, solve, HamMatrix, RealMatrix};
use crate::error::{Error, Result};
use crate::sp_stiefel::{StPoint, StTangent};

const MAX_RETRIES: usize = 3;

/// 64-bit Mersenne Twister producing standard-normal draws.
#[derive(Clone)]
pub struct Rng {
    inner: Mt64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Mt64::seed_from_u64(seed),
        }
    }

    /// Independent stream `stream` of a base seed, used to give each run of an
    /// experiment its own generator.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Self::new(splitmix64(
            seed ^ splitmix64(stream.wrapping_add(0x632b_e59b_d9b4_e019)),
        ))
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// `rows × cols` matrix of independent standard normals, filled row by row.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> RealMatrix {
        let mut m = RealMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.normal();
            }
        }
        m
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `Ω = [[A, B], [C, −Aᵀ]]` with standard-normal `A` and symmetrized
/// standard-normal `B`, `C`.
pub fn rand_hamiltonian(rng: &mut Rng, n: usize) -> HamMatrix {
    let a = rng.normal_matrix(n, n);
    let b = rng.normal_matrix(n, n);
    let c = rng.normal_matrix(n, n);
    let b = (&b + b.transpose()) * 0.5;
    let c = (&c + c.transpose()) * 0.5;
    let mut m = RealMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, n)).copy_from(&b);
    m.view_mut((n, 0), (n, n)).copy_from(&c);
    m.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    HamMatrix::from_raw(m)
}

/// Scaling of the normalized Hamiltonian before the Cayley transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CayScale {
    /// `cay(Ω/2) E`
    Half,
    /// `cay(Ω) E`
    One,
}

/// Random symplectic Stiefel point `cay(sΩ) E` with `‖Ω‖_F = 1`.
pub fn rand_stiefel_point(
    rng: &mut Rng,
    n: usize,
    k: usize,
    scale: CayScale,
) -> Result<RealMatrix> {
    if k == 0 || k > n {
        return Err(Error::Dimension(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    let s = match scale {
        CayScale::Half => 0.5,
        CayScale::One => 1.0,
    };
    let e = canonical_e_matrix(n, k);
    let eye = identity(2 * n);
    let mut last = Error::Singular("Cayley transform of random Hamiltonian");
    for _ in 0..=MAX_RETRIES {
        let om = rand_hamiltonian(rng, n);
        let om = om.as_mat() * (s / om.as_mat().norm());
        // cay(Ω)E = (I − Ω)⁻¹(I + Ω)E
        match solve(
            &(&eye - &om),
            &(&e + &om * &e),
            "I - Omega for random point",
        ) {
            Ok(u) => return Ok(u),
            Err(err) => last = err,
        }
    }
    Err(last)
}

/// Random unit tangent `Δ = UA + H` at `u` with `A ∈ sp(2k)` and `U⁺H = 0`.
/// With `horizontal` set, `A = 0`.
pub fn rand_stiefel_tangent(rng: &mut Rng, u: &StPoint, horizontal: bool) -> StTangent {
    let (n, k) = (u.n(), u.k());
    let a = if horizontal {
        RealMatrix::zeros(2 * k, 2 * k)
    } else {
        rand_hamiltonian(rng, k).into_mat()
    };
    let w = rng.normal_matrix(2 * n, 2 * k);
    let um = u.as_mat();
    let h = &w - um * (sinv(um) * &w);
    let delta = um * &a + &h;
    let s = 1.0 / delta.norm();
    StTangent::from_raw_parts(u.clone(), delta * s, a * s, h * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{feasibility, ham_residual};

    #[test]
    fn same_seed_same_stream() {
        let a = Rng::new(5).normal_matrix(3, 4);
        let b = Rng::new(5).normal_matrix(3, 4);
        assert_eq!(a, b);
        assert_ne!(a, Rng::new(6).normal_matrix(3, 4));
        assert_ne!(Rng::derive(5, 0).normal(), Rng::derive(5, 1).normal());
    }

    #[test]
    fn hamiltonian_is_exact() {
        let mut rng = Rng::new(1);
        let om = rand_hamiltonian(&mut rng, 7);
        assert_eq!(ham_residual(om.as_mat()), 0.0);
        let again = rand_hamiltonian(&mut Rng::new(1), 7);
        assert_eq!(om, again);
    }

    #[test]
    fn stiefel_point_is_feasible() {
        let mut rng = Rng::new(2);
        let u = rand_stiefel_point(&mut rng, 100, 10, CayScale::One).unwrap();
        assert!(feasibility(&u) <= 1e-10);
        let v = rand_stiefel_point(&mut Rng::new(2), 100, 10, CayScale::One).unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn stiefel_point_rejects_bad_dims() {
        let mut rng = Rng::new(3);
        assert!(rand_stiefel_point(&mut rng, 2, 3, CayScale::Half).is_err());
        assert!(rand_stiefel_point(&mut rng, 2, 0, CayScale::Half).is_err());
    }

    #[test]
    fn tangent_is_tangent_and_unit() {
        let mut rng = Rng::new(4);
        let u = StPoint::new(rand_stiefel_point(&mut rng, 20, 3, CayScale::One).unwrap()).unwrap();
        let d = rand_stiefel_tangent(&mut rng, &u, false);
        let um = u.as_mat();
        let dm = d.as_mat();
        assert!((sinv(um) * dm + sinv(dm) * um).norm() <= 1e-10);
        assert!((dm.norm() - 1.0).abs() <= 1e-14);
        let dh = rand_stiefel_tangent(&mut rng, &u, true);
        assert!((sinv(um) * dh.as_mat()).norm() <= 1e-10);
    }
}
