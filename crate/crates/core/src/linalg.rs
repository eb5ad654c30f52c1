//! Small complex linear-algebra helpers shared by the models and solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const J: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = theta.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}

/// Frobenius norm squared.
pub fn fro2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `Re tr(Aᴴ B)`, the real inner product used for all complex gradients.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Block-diagonal stacking of square blocks.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn hpd_inverse(m: &CMat) -> Option<CMat> {
    m.clone().cholesky().map(|c| c.inverse())
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
