use super::*;
use crate::matfun::{
    canonical_e_matrix, cay, rand_hamiltonian, rand_stiefel_point, rand_stiefel_tangent, sinv,
    CayScale, Rng,
};
use crate::sp_stiefel::cayley_retract;

fn point(rng: &mut Rng, n: usize, k: usize) -> StPoint {
    StPoint::new(rand_stiefel_point(rng, n, k, CayScale::Half).unwrap()).unwrap()
}

fn nearest_target(rng: &mut Rng, n: usize, k: usize) -> (RealMatrix, StPoint) {
    let a = rng.normal_matrix(2 * n, 2 * k);
    let a = &a / crate::matfun::spectral_norm(&a);
    (a, point(rng, n, k))
}

fn nearest(rng: &mut Rng, n: usize, k: usize) -> (Problem, StPoint) {
    let (a, u) = nearest_target(rng, n, k);
    (nearest_symplectic_problem(a), u)
}

fn subspace_data(rng: &mut Rng, n: usize, k: usize, noise: f64) -> (RealMatrix, StPoint) {
    let a = rand_stiefel_point(rng, n, k, CayScale::Half).unwrap();
    let e = rng.normal_matrix(2 * n, 2 * n);
    let e = &e * (noise / crate::matfun::spectral_norm(&e));
    (&a * sinv(&a) + e, point(rng, n, k))
}

fn subspace(rng: &mut Rng, n: usize, k: usize, noise: f64) -> (Problem, StPoint) {
    let (s, u) = subspace_data(rng, n, k, noise);
    (subspace_fit_problem(s), u)
}

struct Constant;

impl Objective for Constant {
    fn value(&self, _: &RealMatrix) -> f64 {
        3.0
    }

    fn euclid_grad(&self, u: &RealMatrix) -> RealMatrix {
        RealMatrix::zeros(u.nrows(), u.ncols())
    }
}

fn fd_gradient(obj: &dyn Objective, u: &RealMatrix) -> RealMatrix {
    let eps = 1e-6;
    RealMatrix::from_fn(u.nrows(), u.ncols(), |i, j| {
        let mut up = u.clone();
        up[(i, j)] += eps;
        let mut dn = u.clone();
        dn[(i, j)] -= eps;
        (obj.value(&up) - obj.value(&dn)) / (2.0 * eps)
    })
}

#[test]
fn subspace_gradient_matches_finite_differences() {
    let mut rng = Rng::new(61);
    let (n, k) = (10, 2);
    let a = rand_stiefel_point(&mut rng, n, k, CayScale::Half).unwrap();
    let obj = SubspaceFit {
        data: &a * sinv(&a) + rng.normal_matrix(2 * n, 2 * n) * 0.1,
    };
    let u = rand_stiefel_point(&mut rng, n, k, CayScale::Half).unwrap();
    let g = obj.euclid_grad(&u);
    for _ in 0..5 {
        let w = rng.normal_matrix(2 * n, 2 * k);
        let w = &w / w.norm();
        let eps = 1e-6;
        let slope = (obj.value(&(&u + &w * eps)) - obj.value(&(&u - &w * eps))) / (2.0 * eps);
        let want = g.dot(&w);
        assert!(
            (slope - want).abs() <= 1e-6 * want.abs().max(1.0),
            "{slope} vs {want}"
        );
    }
    let fd = fd_gradient(&obj, &u);
    assert!((fd - &g).norm() <= 1e-6 * g.norm());
}

#[test]
fn nearest_gradient_and_values() {
    let mut rng = Rng::new(62);
    let e = canonical_e_matrix(3, 2);
    let obj = NearestSymplectic {
        target: RealMatrix::zeros(6, 4),
    };
    assert_eq!(obj.value(&e), 4.0);
    let u = rand_stiefel_point(&mut rng, 3, 2, CayScale::Half).unwrap();
    let at_opt = NearestSymplectic { target: u.clone() };
    assert_eq!(at_opt.value(&u), 0.0);
    assert_eq!(at_opt.euclid_grad(&u).norm(), 0.0);
    let obj = NearestSymplectic {
        target: rng.normal_matrix(6, 4),
    };
    assert!((fd_gradient(&obj, &u) - obj.euclid_grad(&u)).norm() <= 1e-6);
}

#[test]
fn subspace_objective_is_representative_invariant() {
    let mut rng = Rng::new(63);
    let (p, u) = subspace(&mut rng, 8, 2, 1.0);
    let om = rand_hamiltonian(&mut rng, 2);
    let n = cay(&(om.as_mat() * (0.5 / om.as_mat().norm()))).unwrap();
    let f = p.value(&u);
    let fn_ = p.value(&u.right_mul(&n).unwrap());
    assert!((f - fn_).abs() <= 1e-9 * (1.0 + f));
    let exact = SubspaceFit {
        data: u.as_mat() * u.sinv() * rng.normal_matrix(16, 16),
    };
    assert!(exact.value(u.as_mat()) <= 1e-20);
}

#[test]
fn abb_initial_and_clamped() {
    let mut rng = Rng::new(64);
    let (p, u) = nearest(&mut rng, 4, 1);
    let cfg = DescentConfig::default();
    let mut state = DescentState::new(&p, u).unwrap();
    state.gamma_abb = 2.5;
    assert_eq!(abb_step(&state, &cfg), 2.5);
    state.gamma_abb = 1e20;
    assert_eq!(abb_step(&state, &cfg), 1e15);
    state.gamma_abb = 0.0;
    assert_eq!(abb_step(&state, &cfg), 1e-15);
}

#[test]
fn abb_alternates_by_parity() {
    let mut rng = Rng::new(65);
    let (p, u) = nearest(&mut rng, 4, 1);
    let cfg = DescentConfig::default();
    let mut state = DescentState::new(&p, u.clone()).unwrap();
    let v = point(&mut rng, 4, 1);
    let s = u.as_mat() - v.as_mat();
    let g_prev = p.gradient(&v).unwrap();
    let y = state.grad.as_mat() - g_prev.as_mat();
    state.prev_iterate = Some(v);
    state.prev_grad = Some(g_prev);
    let sy = s.dot(&y).abs();
    state.iter = 1;
    let odd = abb_step(&state, &cfg);
    assert!((odd - s.norm_squared() / sy).abs() <= 1e-14 * odd);
    state.iter = 2;
    let even = abb_step(&state, &cfg);
    assert!((even - sy / y.norm_squared()).abs() <= 1e-14 * even);
    state.iter = 3;
    assert_eq!(abb_step(&state, &cfg), odd);
}

#[test]
fn abb_is_one_when_s_equals_y() {
    let mut rng = Rng::new(66);
    let (p, u) = nearest(&mut rng, 3, 1);
    let cfg = DescentConfig::default();
    let mut state = DescentState::new(&p, u.clone()).unwrap();
    // shift the previous gradient so that Y = S
    let v = point(&mut rng, 3, 1);
    let s = u.as_mat() - v.as_mat();
    let mut g_prev = state.grad.clone();
    if let GradKind::St(g) = &mut g_prev.inner {
        *g = StTangent::from_raw_parts(v.clone(), g.as_mat() - &s, g.a().clone(), g.h().clone());
    }
    state.prev_iterate = Some(v);
    state.prev_grad = Some(g_prev);
    for iter in [1, 2] {
        state.iter = iter;
        assert!((abb_step(&state, &cfg) - 1.0).abs() <= 1e-12);
    }
}

fn accepts(p: &Problem, state: &DescentState, t: f64, cfg: &DescentConfig) -> bool {
    let d = state.grad.as_st_tangent().unwrap().scale(-1.0);
    let next = cayley_retract(&state.iterate, &d, t).unwrap();
    p.value(&next) <= state.fval - cfg.beta * t * state.grad.sq_norm()
}

#[test]
fn line_search_backtracks_to_third_trial() {
    let mut rng = Rng::new(67);
    let (p, u) = nearest(&mut rng, 5, 2);
    let cfg = DescentConfig::default();
    let state = DescentState::new(&p, u).unwrap();
    // largest accepted step, by bisection on the decrease test
    let (mut lo, mut hi) = (1e-8, 1e3);
    assert!(accepts(&p, &state, lo, &cfg) && !accepts(&p, &state, hi, &cfg));
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if accepts(&p, &state, mid, &cfg) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = lo / cfg.delta.powf(1.5);
    let out = line_search(&p, &state, gamma, &cfg).unwrap();
    assert!(out.accepted);
    assert!((out.t - gamma * cfg.delta * cfg.delta).abs() <= 1e-15 * out.t);

    let tiny = line_search(&p, &state, lo * 1e-3, &cfg).unwrap();
    assert_eq!(tiny.t, lo * 1e-3);
    assert!(tiny.fnext < state.fval);
}

#[test]
fn line_search_takes_last_trial_when_nothing_passes() {
    let mut rng = Rng::new(68);
    let (p, u) = nearest(&mut rng, 5, 2);
    let cfg = DescentConfig {
        h_max: 1,
        ..DescentConfig::default()
    };
    let state = DescentState::new(&p, u).unwrap();
    let out = line_search(&p, &state, 1e6, &cfg).unwrap();
    assert!(!out.accepted);
    assert_eq!(out.t, 1e6 * cfg.delta);
}

#[test]
fn constant_objective_converges_immediately() {
    let mut rng = Rng::new(69);
    let u = point(&mut rng, 4, 2);
    for mode in [ManifoldMode::StiefelG, ManifoldMode::GrassmannG] {
        let p = Problem::new(Constant, mode, Retraction::Cayley);
        let state = descend(&p, u.clone(), &DescentConfig::default()).unwrap();
        assert!(state.converged);
        assert_eq!(state.trace.len(), 1);
        assert_eq!(state.trace[0].iter, 0);
        assert_eq!(state.iterate.as_mat(), u.as_mat());
    }
}

fn assert_monotone(state: &DescentState) {
    let mut prev = f64::INFINITY;
    for e in &state.trace {
        assert!(e.fval <= prev, "trace increases at iter {}", e.iter);
        prev = e.fval;
    }
    assert!(state.fval <= prev);
}

#[test]
fn nearest_problem_converges_for_each_retraction() {
    let mut rng = Rng::new(70);
    let (a, u0) = nearest_target(&mut rng, 20, 3);
    let cfg = DescentConfig::default();
    let mut finals = Vec::new();
    for r in [
        Retraction::Geodesic,
        Retraction::Cayley,
        Retraction::QuasiGeodesic,
    ] {
        let p = nearest_symplectic_problem(a.clone()).with_retraction(r);
        let state = descend(&p, u0.clone(), &cfg).unwrap();
        assert!(state.converged, "{r} did not converge");
        assert!(state.grad.frobenius() < 1e-5);
        assert_monotone(&state);
        assert!(state.iterate.feasibility() <= 1e-6);
        finals.push(state.fval);
    }
    let best = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    for f in finals {
        assert!((f - best) / best.abs().max(1.0) <= 1e-10);
    }
}

#[test]
fn converged_point_is_stationary() {
    let mut rng = Rng::new(71);
    let (p, u0) = nearest(&mut rng, 10, 2);
    let state = descend(&p, u0, &DescentConfig::default()).unwrap();
    assert!(state.converged);
    let u = &state.iterate;
    for _ in 0..10 {
        let d = rand_stiefel_tangent(&mut rng, u, false);
        let eps = 1e-4;
        let plus = p.value(&cayley_retract(u, &d, eps).unwrap());
        let minus = p.value(&cayley_retract(u, &d, -eps).unwrap());
        assert!(((plus - minus) / (2.0 * eps)).abs() <= 1e-5);
    }
}

#[test]
fn subspace_problem_converges_in_both_modes() {
    let mut rng = Rng::new(72);
    let (s, u0) = subspace_data(&mut rng, 12, 2, 1.0);
    let cfg = DescentConfig::default();
    let mut finals = Vec::new();
    for mode in [ManifoldMode::GrassmannG, ManifoldMode::StiefelG] {
        for r in [Retraction::Geodesic, Retraction::Cayley] {
            let q = Problem::new(SubspaceFit { data: s.clone() }, mode, r);
            let state = descend(&q, u0.clone(), &cfg).unwrap();
            assert!(state.converged, "{mode}/{r} did not converge");
            assert_monotone(&state);
            finals.push(state.fval);
        }
    }
    let best = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    for f in finals {
        assert!((f - best) / best.abs().max(1.0) <= 1e-8, "{f} vs {best}");
    }
}

#[test]
fn subspace_problem_recovers_exact_subspace() {
    let mut rng = Rng::new(73);
    let (p, u0) = subspace(&mut rng, 12, 2, 0.0);
    let state = descend(&p, u0, &DescentConfig::default()).unwrap();
    assert!(state.fval <= 1e-10, "{}", state.fval);
}

#[test]
fn quasi_geodesic_is_rejected_in_grassmann_mode() {
    let mut rng = Rng::new(74);
    let (p, u0) = subspace(&mut rng, 5, 1, 1.0);
    let p = p.with_retraction(Retraction::QuasiGeodesic);
    assert!(matches!(
        descend(&p, u0, &DescentConfig::default()),
        Err(Error::Config(_))
    ));
}
