//! Central finite-difference checks of analytic gradients.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::CVec;

pub const DEFAULT_FD_STEP: f64 = 1e-6;

fn relative(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// `‖g_fd − g‖ / max(‖g_fd‖, ‖g‖)` for a function of a complex vector with
/// gradient `g = 2·∂f/∂z*` (so `∂f/∂Re z_l = Re g_l`, `∂f/∂Im z_l = Im g_l`).
pub fn complex_gradient_error(f: impl Fn(&CVec) -> f64, grad: &CVec, x: &CVec, h: f64) -> f64 {
    let mut fd = Vec::with_capacity(2 * x.len());
    let mut an = Vec::with_capacity(2 * x.len());
    for l in 0..x.len() {
        for dir in [Complex64::new(h, 0.0), Complex64::new(0.0, h)] {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[l] += dir;
            xm[l] -= dir;
            fd.push((f(&xp) - f(&xm)) / (2.0 * h));
        }
        an.push(grad[l].re);
        an.push(grad[l].im);
    }
    relative(&an, &fd)
}

/// Same check for a function of a real symmetric matrix restricted to the
/// pattern `mask`; `grad` is the symmetric gradient under `⟨A, B⟩ = Σ A_ij B_ij`.
pub fn symmetric_gradient_error(
    f: impl Fn(&DMatrix<f64>) -> f64,
    grad: &DMatrix<f64>,
    x: &DMatrix<f64>,
    mask: &DMatrix<bool>,
    h: f64,
) -> f64 {
    let n = x.nrows();
    let mut fd = Vec::new();
    let mut an = Vec::new();
    for i in 0..n {
        for j in i..n {
            if !mask[(i, j)] {
                continue;
            }
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[(i, j)] += h;
            xm[(i, j)] -= h;
            if i != j {
                xp[(j, i)] += h;
                xm[(j, i)] -= h;
            }
            fd.push((f(&xp) - f(&xm)) / (2.0 * h));
            an.push(if i == j {
                grad[(i, i)]
            } else {
                grad[(i, j)] + grad[(j, i)]
            });
        }
    }
    relative(&an, &fd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_correct_and_wrong_gradients() {
        let a = CVec::from_vec(vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.5)]);
        let x = CVec::from_vec(vec![Complex64::new(0.3, 0.1), Complex64::new(-1.0, 2.0)]);
        // f = |aᴴx|², 2∂f/∂x* = 2a(aᴴx)
        let f = |x: &CVec| a.dotc(x).norm_sqr();
        let g = &a * (a.dotc(&x) * 2.0);
        assert!(complex_gradient_error(f, &g, &x, DEFAULT_FD_STEP) < 1e-8);
        let wrong = &a * a.dotc(&x);
        assert!(complex_gradient_error(f, &wrong, &x, DEFAULT_FD_STEP) > 0.1);

        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        let mask = DMatrix::from_element(2, 2, true);
        let fm = |m: &DMatrix<f64>| m.norm_squared();
        let gm = &x * 2.0;
        assert!(symmetric_gradient_error(fm, &gm, &x, &mask, DEFAULT_FD_STEP) < 1e-8);
    }
}
