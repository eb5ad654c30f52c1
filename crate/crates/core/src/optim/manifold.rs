//! Search domains for first-order ascent.
//!
//! Gradients follow the convention `g = 2·∂f/∂z*`, so a first-order change is
//! `df = Re⟨g, dz⟩` and `g` itself is the steepest-ascent direction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::CVec;

/// A domain with a tangent-space projection and a retraction.
pub trait Manifold {
    type Point: Clone;

    /// Maps a Euclidean gradient at `x` to the Riemannian gradient.
    /// Also used to carry a tangent vector from a previous iterate to `x`.
    fn project(&self, x: &Self::Point, v: &Self::Point) -> Self::Point;

    /// Real inner product of two tangent vectors.
    fn inner(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// Point reached from `x` by a step `t·v`; `None` if the step is not defined.
    fn retract(&self, x: &Self::Point, v: &Self::Point, t: f64) -> Option<Self::Point>;

    fn is_finite(&self, x: &Self::Point) -> bool;

    /// `a·v` for a tangent vector `v`.
    fn scale(&self, v: &Self::Point, a: f64) -> Self::Point;

    /// `a·v + w` for tangent vectors `v`, `w`.
    fn axpy(&self, a: f64, v: &Self::Point, w: &Self::Point) -> Self::Point;
}

fn cinner(a: &CVec, b: &CVec) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Unit-modulus complex vectors `{x : |x_l| = 1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexCircle;

/// Elementwise normalisation `(x_l + v_l)/|x_l + v_l|`; `None` when any entry vanishes.
pub fn retract_circle(x: &CVec, v: &CVec) -> Option<CVec> {
    let mut out = x + v;
    for z in out.iter_mut() {
        let r = z.norm();
        if !(r > f64::MIN_POSITIVE) || !r.is_finite() {
            return None;
        }
        *z /= r;
    }
    Some(out)
}

impl Manifold for ComplexCircle {
    type Point = CVec;

    fn project(&self, x: &CVec, g: &CVec) -> CVec {
        CVec::from_iterator(
            x.len(),
            x.iter().zip(g.iter()).map(|(xl, gl)| gl - xl * (gl * xl.conj()).re),
        )
    }

    fn inner(&self, a: &CVec, b: &CVec) -> f64 {
        cinner(a, b)
    }

    fn retract(&self, x: &CVec, v: &CVec, t: f64) -> Option<CVec> {
        retract_circle(x, &(v * Complex64::new(t, 0.0)))
    }

    fn is_finite(&self, x: &CVec) -> bool {
        x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn scale(&self, v: &CVec, a: f64) -> CVec {
        v * Complex64::new(a, 0.0)
    }

    fn axpy(&self, a: f64, v: &CVec, w: &CVec) -> CVec {
        v * Complex64::new(a, 0.0) + w
    }
}

/// Unconstrained complex vectors (matrices are handled in flattened form).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexEuclidean;

impl Manifold for ComplexEuclidean {
    type Point = CVec;

    fn project(&self, _x: &CVec, g: &CVec) -> CVec {
        g.clone()
    }

    fn inner(&self, a: &CVec, b: &CVec) -> f64 {
        cinner(a, b)
    }

    fn retract(&self, x: &CVec, v: &CVec, t: f64) -> Option<CVec> {
        Some(x + v * Complex64::new(t, 0.0))
    }

    fn is_finite(&self, x: &CVec) -> bool {
        x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn scale(&self, v: &CVec, a: f64) -> CVec {
        v * Complex64::new(a, 0.0)
    }

    fn axpy(&self, a: f64, v: &CVec, w: &CVec) -> CVec {
        v * Complex64::new(a, 0.0) + w
    }
}

/// Real symmetric matrices with a fixed sparsity pattern.
#[derive(Debug, Clone)]
pub struct SymmetricMatrices {
    mask: DMatrix<bool>,
}

impl SymmetricMatrices {
    pub fn new(mask: DMatrix<bool>) -> Self {
        SymmetricMatrices { mask }
    }

    pub fn mask(&self) -> &DMatrix<bool> {
        &self.mask
    }

    /// Symmetrises and zeroes entries outside the pattern.
    pub fn restrict(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        DMatrix::from_fn(n, n, |i, j| {
            if self.mask[(i, j)] {
                0.5 * (m[(i, j)] + m[(j, i)])
            } else {
                0.0
            }
        })
    }
}

impl Manifold for SymmetricMatrices {
    type Point = DMatrix<f64>;

    fn project(&self, _x: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
        self.restrict(g)
    }

    fn inner(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        a.dot(b)
    }

    fn retract(&self, x: &DMatrix<f64>, v: &DMatrix<f64>, t: f64) -> Option<DMatrix<f64>> {
        Some(self.restrict(&(x + v * t)))
    }

    fn is_finite(&self, x: &DMatrix<f64>) -> bool {
        x.iter().all(|v| v.is_finite())
    }

    fn scale(&self, v: &DMatrix<f64>, a: f64) -> DMatrix<f64> {
        v * a
    }

    fn axpy(&self, a: f64, v: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        v * a + w
    }
}
