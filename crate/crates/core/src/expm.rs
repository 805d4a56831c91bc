//! Dense complex matrix exponential: degree-13 Padé approximant with
//! scaling and squaring.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

const B: [f64; 14] = [
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

/// Largest 1-norm for which the unscaled [13/13] approximant is accurate
/// to double precision.
const THETA_13: f64 = 5.371920351148152;

/// exp(A) for a square complex matrix.
pub fn expm(a: &CMat) -> Result<CMat> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    if !linalg::is_finite(a) {
        return Err(Error::NonFinite);
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let norm = linalg::one_norm(a);
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a * c(0.5_f64.powi(s));

    let ident = CMat::identity(n, n);
    let a2 = linalg::matmul(&a, &a);
    let a4 = linalg::matmul(&a2, &a2);
    let a6 = linalg::matmul(&a4, &a2);

    let mut w = &a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]);
    let mut u_inner = linalg::matmul(&a6, &w);
    u_inner += &a6 * c(B[7]) + &a4 * c(B[5]) + &a2 * c(B[3]) + &ident * c(B[1]);
    let u = linalg::matmul(&a, &u_inner);

    w = &a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]);
    let mut v = linalg::matmul(&a6, &w);
    v += &a6 * c(B[6]) + &a4 * c(B[4]) + &a2 * c(B[2]) + &ident * c(B[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::NonFinite)?;
    for _ in 0..s {
        r = linalg::matmul(&r, &r);
    }
    if !linalg::is_finite(&r) {
        return Err(Error::NonFinite);
    }
    Ok(r)
}
