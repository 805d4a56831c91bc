//! Dense complex linear-algebra helpers shared by every module.
//!
//! Matrices are `nalgebra` column-major `DMatrix<Complex64>`. Products go
//! through the `matrixmultiply` complex kernel, which is an order of
//! magnitude faster than the generic fallback for the superoperator sizes
//! used here (up to a few thousand rows).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `alpha * a * b + beta * out`, written into `out`.
pub fn gemm_into(alpha: Complex64, a: &CMat, b: &CMat, beta: Complex64, out: &mut CMat) {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "inner dimensions differ");
    assert_eq!(out.shape(), (m, n), "output shape mismatch");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        *out *= beta;
        return;
    }
    // Complex64 is repr(C) { re, im }, identical to matrixmultiply's [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [beta.re, beta.im],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    gemm_into(ONE, a, b, ZERO, &mut out);
    out
}

pub fn matvec(a: &CMat, x: &CVec) -> CVec {
    assert_eq!(a.ncols(), x.len());
    let mut out = CVec::zeros(a.nrows());
    if a.nrows() == 0 || x.is_empty() {
        return out;
    }
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            a.nrows(),
            a.ncols(),
            1,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            a.nrows() as isize,
            x.as_ptr() as *const [f64; 2],
            1,
            x.len() as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            a.nrows() as isize,
        );
    }
    out
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |M - M†|`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    if n != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Induced 1-norm (max column sum).
pub fn one_norm(m: &CMat) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr[a b]` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    // Symmetrize to strip rounding noise before the solver sees it.
    let herm = (m + m.adjoint()) * c(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let herm = (m + m.adjoint()) * c(0.5);
    let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Trace distance `½‖a − b‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * eigvalsh(&(a - b)).iter().map(|v| v.abs()).sum::<f64>()
}

/// Row-major vectorization: element `(α, β)` lands at `α·N + β`.
pub fn vectorize(m: &CMat) -> CVec {
    let n = m.nrows();
    CVec::from_fn(n * n, |k, _| m[(k / n, k % n)])
}

pub fn unvectorize(v: &CVec, n: usize) -> CMat {
    assert_eq!(v.len(), n * n, "vector length is not N²");
    CMat::from_fn(n, n, |a, b| v[a * n + b])
}

/// `U† M U`.
pub fn conjugate_by(u: &CMat, m: &CMat) -> CMat {
    matmul(&u.adjoint(), &matmul(m, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        CMat::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            Complex64::new(a, b)
        })
    }

    #[test]
    fn zgemm_matches_naive_product() {
        let a = sample(7, 1);
        let b = sample(7, 2);
        let fast = matmul(&a, &b);
        let slow = &a * &b;
        assert!(max_abs(&(fast - slow)) < 1e-13);
    }

    #[test]
    fn rectangular_products() {
        let a = CMat::from_fn(3, 5, |i, j| Complex64::new(i as f64, j as f64));
        let b = CMat::from_fn(5, 2, |i, j| Complex64::new(j as f64 - i as f64, 1.0));
        assert!(max_abs(&(matmul(&a, &b) - &a * &b)) < 1e-12);
        let x = CVec::from_fn(5, |i, _| Complex64::new(1.0, i as f64));
        assert!((matvec(&a, &x) - &a * &x).norm() < 1e-12);
    }

    #[test]
    fn vectorization_is_row_major() {
        let m = CMat::from_fn(3, 3, |i, j| c((10 * i + j) as f64));
        let v = vectorize(&m);
        assert_eq!(v[1 * 3 + 2], c(12.0));
        assert_eq!(unvectorize(&v, 3), m);
    }

    #[test]
    fn eigh_reconstructs() {
        let a = sample(6, 9);
        let h = &a + a.adjoint();
        let (vals, vecs) = eigh(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let lambda = CMat::from_diagonal(&CVec::from_iterator(6, vals.iter().map(|&v| c(v))));
        let back = &vecs * lambda * vecs.adjoint();
        assert!(max_abs(&(back - h)) < 1e-12);
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors_is_one() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = ONE;
        let mut b = CMat::zeros(2, 2);
        b[(1, 1)] = ONE;
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-15);
    }
}
