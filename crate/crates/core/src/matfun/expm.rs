use super::{check_finite, identity, norm_1, solve, RealMatrix};
use crate::error::{Error, Result};

// Largest 1-norms for which the [m/m] diagonal Padé approximant meets unit
// roundoff in backward error (double precision).
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant. The order (3, 5, 7, 9 or 13) and the number of squarings are
/// chosen from the 1-norm so the backward error stays at unit roundoff.
pub fn expm(x: &RealMatrix) -> Result<RealMatrix> {
    if !x.is_square() {
        return Err(Error::Dimension(format!(
            "expm needs a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    check_finite(x, "expm argument")?;
    let n = x.nrows();
    if n == 0 {
        return Ok(x.clone());
    }
    let norm = norm_1(x);
    let eye = identity(n);
    if norm == 0.0 {
        return Ok(eye);
    }

    let a2 = x * x;
    if norm <= THETA_9 {
        let (u, v) = if norm <= THETA_3 {
            low_order(x, &a2, &eye, &B3)
        } else if norm <= THETA_5 {
            low_order(x, &a2, &eye, &B5)
        } else if norm <= THETA_7 {
            low_order(x, &a2, &eye, &B7)
        } else {
            low_order(x, &a2, &eye, &B9)
        };
        return pade_quotient(&u, &v);
    }

    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let (a, a2) = if s > 0 {
        let f = 2f64.powi(-s);
        (x * f, a2 * (f * f))
    } else {
        (x.clone(), a2)
    };
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = &a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];
    let mut r = pade_quotient(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Odd part `U` and even part `V` of the Padé numerator for orders ≤ 9.
fn low_order(
    a: &RealMatrix,
    a2: &RealMatrix,
    eye: &RealMatrix,
    b: &[f64],
) -> (RealMatrix, RealMatrix) {
    let m = b.len() - 1;
    let mut power = eye.clone();
    let mut u_even = eye * b[1];
    let mut v = eye * b[0];
    let mut j = 2;
    while j <= m {
        power = &power * a2;
        v += &power * b[j];
        if j < m {
            u_even += &power * b[j + 1];
        }
        j += 2;
    }
    (a * u_even, v)
}

/// `(V − U)⁻¹ (V + U)`.
fn pade_quotient(u: &RealMatrix, v: &RealMatrix) -> Result<RealMatrix> {
    solve(&(v - u), &(v + u), "Pade denominator")
}
