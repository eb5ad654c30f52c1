//! First-order ascent with Armijo backtracking.

use std::collections::VecDeque;

use super::manifold::Manifold;
use super::SolveReport;
use crate::error::{Error, Result};

/// A smooth objective on a domain, with its Euclidean gradient.
pub struct SmoothProblem<M, F, G> {
    pub domain: M,
    pub objective: F,
    pub gradient: G,
}

impl<M, F, G> SmoothProblem<M, F, G>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64,
    G: Fn(&M::Point) -> M::Point,
{
    pub fn new(domain: M, objective: F, gradient: G) -> Self {
        SmoothProblem {
            domain,
            objective,
            gradient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Stop when the Riemannian gradient norm falls below this.
    pub tol: f64,
    /// Stop when one step improves the objective by less than
    /// `f_tol·max(1, |f|)`; zero disables the test.
    pub f_tol: f64,
    pub beta: f64,
    pub c: f64,
    /// Length of the very first trial step.
    pub initial_step: f64,
    pub max_backtracks: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            max_iter: 500,
            tol: 1e-8,
            f_tol: 0.0,
            beta: 0.5,
            c: 1e-4,
            initial_step: 1.0,
            max_backtracks: 60,
        }
    }
}

fn solver_error(message: &str, iterations: usize, trace: &[f64]) -> Error {
    Error::Solver {
        message: message.to_owned(),
        iterations,
        trace: trace.to_vec(),
    }
}

/// Maximises the objective from `init`.
///
/// The search direction is a limited-memory BFGS step built from recent
/// gradient differences (carried to the current tangent space by
/// projection), falling back to the Riemannian gradient when it is not an
/// ascent direction. The step length is halved until the Armijo condition
/// `f(R(x, t·d)) ≥ f(x) + c·t·⟨g, d⟩` holds, so the trace never decreases.
pub fn ascend<M, F, G>(
    problem: &SmoothProblem<M, F, G>,
    init: M::Point,
    opts: &AscentOptions,
) -> Result<SolveReport<M::Point>>
where
    M: Manifold,
    F: Fn(&M::Point) -> f64,
    G: Fn(&M::Point) -> M::Point,
{
    let dom = &problem.domain;
    let mut x = init;
    let mut f = (problem.objective)(&x);
    let mut trace = vec![f];
    if !f.is_finite() {
        return Err(solver_error("objective is not finite at the initial point", 0, &trace));
    }
    let mut g = dom.project(&x, &(problem.gradient)(&x));
    if !dom.is_finite(&g) {
        return Err(solver_error("gradient is not finite at the initial point", 0, &trace));
    }
    let mut gnorm2 = dom.inner(&g, &g);
    // (s, y) pairs with y the decrease of the gradient along s
    let mut memory: VecDeque<(M::Point, M::Point)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if gnorm2.sqrt() < opts.tol {
            converged = true;
            break;
        }
        let (d, mut t) = match lbfgs_direction(dom, &x, &g, &mut memory) {
            Some(d) => (d, 1.0),
            None => (g.clone(), opts.initial_step / gnorm2.sqrt()),
        };
        let slope = dom.inner(&g, &d);
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            if let Some(y) = dom.retract(&x, &d, t) {
                let fy = (problem.objective)(&y);
                if fy >= f + opts.c * t * slope {
                    accepted = Some((y, fy));
                    break;
                }
            }
            t *= opts.beta;
        }
        let Some((y, fy)) = accepted else {
            if memory.is_empty() {
                // no ascent possible at working precision
                converged = gnorm2.sqrt() < opts.tol.sqrt();
                break;
            }
            memory.clear();
            continue;
        };
        iterations += 1;
        let gain = fy - f;
        let g_new = dom.project(&y, &(problem.gradient)(&y));
        if !dom.is_finite(&g_new) {
            trace.push(fy);
            return Err(solver_error("gradient is not finite", iterations, &trace));
        }
        let s_vec = dom.project(&y, &dom.scale(&d, t));
        let g_old = dom.project(&y, &g);
        let y_vec = dom.axpy(-1.0, &g_new, &g_old);
        if dom.inner(&s_vec, &y_vec) > 1e-12 * dom.inner(&s_vec, &s_vec).sqrt() * dom.inner(&y_vec, &y_vec).sqrt() {
            memory.push_back((s_vec, y_vec));
            if memory.len() > MEMORY {
                memory.pop_front();
            }
        }
        x = y;
        f = fy;
        g = g_new;
        gnorm2 = dom.inner(&g, &g);
        trace.push(f);
        if opts.f_tol > 0.0 && gain <= opts.f_tol * f.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged && gnorm2.sqrt() < opts.tol {
        converged = true;
    }
    Ok(SolveReport {
        point: x,
        objective: f,
        trace,
        iterations,
        converged,
        max_violation: 0.0,
    })
}

const MEMORY: usize = 8;

/// Two-loop recursion; `None` when the memory is empty or the result is not
/// an ascent direction (the memory is then discarded).
fn lbfgs_direction<M: Manifold>(
    dom: &M,
    x: &M::Point,
    g: &M::Point,
    memory: &mut VecDeque<(M::Point, M::Point)>,
) -> Option<M::Point> {
    for (s, y) in memory.iter_mut() {
        *s = dom.project(x, s);
        *y = dom.project(x, y);
    }
    memory.retain(|(s, y)| dom.inner(s, y) > 0.0);
    let (s_last, y_last) = memory.back()?;
    let gamma = dom.inner(s_last, y_last) / dom.inner(y_last, y_last);
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y) in memory.iter().rev() {
        let rho = 1.0 / dom.inner(s, y);
        let a = rho * dom.inner(s, &q);
        q = dom.axpy(-a, y, &q);
        alphas.push((a, rho));
    }
    let mut r = dom.scale(&q, gamma);
    for ((s, y), (a, rho)) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dom.inner(y, &r);
        r = dom.axpy(a - b, s, &r);
    }
    let d = dom.project(x, &r);
    let slope = dom.inner(g, &d);
    if slope > 0.0 && slope.is_finite() {
        Some(d)
    } else {
        memory.clear();
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVec;
    use crate::optim::manifold::{ComplexCircle, ComplexEuclidean};
    use crate::rng::stream;
    use num_complex::Complex64 as C;
    use rand::Rng;

    fn linear_problem(c: CVec) -> SmoothProblem<ComplexCircle, impl Fn(&CVec) -> f64, impl Fn(&CVec) -> CVec> {
        let c2 = c.clone();
        SmoothProblem::new(ComplexCircle, move |x: &CVec| c.dotc(x).re, move |_x: &CVec| c2.clone())
    }

    #[test]
    fn linear_objective_on_circle() {
        let mut rng = stream(11);
        for _ in 0..10 {
            let c = CVec::from_fn(8, |_, _| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let x0 = CVec::from_fn(8, |_, _| C::from_polar(1.0, rng.random::<f64>() * 6.28));
            let p = linear_problem(c.clone());
            let r = ascend(&p, x0, &AscentOptions::default()).unwrap();
            let best: f64 = c.iter().map(|z| z.norm()).sum();
            assert!((r.objective - best).abs() < 1e-6, "{} vs {best}", r.objective);
            for (x, cl) in r.point.iter().zip(c.iter()) {
                assert!((x.norm() - 1.0).abs() < 1e-12);
                assert!((x - cl / cl.norm()).norm() < 1e-3);
            }
            assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let c = CVec::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 2.0)]);
        let x0 = CVec::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 1.0)]);
        let r = ascend(&linear_problem(c), x0.clone(), &AscentOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.point, x0);
        assert!(r.converged);
    }

    #[test]
    fn concave_quadratic_in_euclidean_space() {
        // maximise −‖x − a‖²; gradient 2∂/∂x* = −2(x − a)
        let a = CVec::from_vec(vec![C::new(1.0, 2.0), C::new(-0.5, 0.3)]);
        let a2 = a.clone();
        let p = SmoothProblem::new(
            ComplexEuclidean,
            move |x: &CVec| -(x - &a).norm_squared(),
            move |x: &CVec| (x - &a2) * C::new(-2.0, 0.0),
        );
        let r = ascend(&p, CVec::zeros(2), &AscentOptions::default()).unwrap();
        assert!(r.objective > -1e-14);
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let p = SmoothProblem::new(ComplexEuclidean, |_x: &CVec| f64::NAN, |x: &CVec| x.clone());
        match ascend(&p, CVec::zeros(1), &AscentOptions::default()) {
            Err(Error::Solver { trace, .. }) => assert_eq!(trace.len(), 1),
            other => panic!("{other:?}"),
        }
    }
}
