//! Quadratic-penalty method for inequality-constrained minimisation.

use super::ascent::{ascend, AscentOptions, SmoothProblem};
use super::manifold::Manifold;
use super::SolveReport;
use crate::error::Result;

/// `minimise f(x)` subject to `g_i(x) ≤ 0`.
///
/// Constraints should be scaled so that `g_i` is a relative violation (for
/// example `p/P_max − 1`); feasibility is judged on `max_i g_i`.
pub trait ConstrainedProblem {
    type Domain: Manifold + Clone;

    fn domain(&self) -> &Self::Domain;

    fn objective(&self, x: &<Self::Domain as Manifold>::Point) -> f64;

    fn constraints(&self, x: &<Self::Domain as Manifold>::Point) -> Vec<f64>;

    /// Euclidean gradient of `f(x) + Σ_i weights_i·g_i(x)`.
    fn gradient(&self, x: &<Self::Domain as Manifold>::Point, weights: &[f64]) -> <Self::Domain as Manifold>::Point;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySchedule {
    pub mu0: f64,
    pub growth: f64,
    pub rounds: usize,
    pub tol_feas: f64,
    /// Stop as soon as a round ends feasible.
    pub stop_when_feasible: bool,
    pub inner: AscentOptions,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        PenaltySchedule {
            mu0: 1.0,
            growth: 10.0,
            rounds: 5,
            tol_feas: 1e-4,
            stop_when_feasible: false,
            inner: AscentOptions::default(),
        }
    }
}

/// Largest constraint value clipped at zero.
pub fn max_violation(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, &v| m.max(v))
}

#[derive(Debug, Clone)]
pub struct PenaltyReport<P> {
    /// Final point; `report.objective` is `f` there (not the penalised merit).
    pub report: SolveReport<P>,
    pub feasible: bool,
    /// Penalty weight used in each round.
    pub mu: Vec<f64>,
}

/// Minimises `f + μ·Σ max(0, g_i)²` for an increasing sequence of `μ`, each
/// round warm-started from the previous one and solved by [`ascend`] on the
/// negated merit.
pub fn penalty_solve<P: ConstrainedProblem>(
    problem: &P,
    init: <P::Domain as Manifold>::Point,
    schedule: &PenaltySchedule,
) -> Result<PenaltyReport<<P::Domain as Manifold>::Point>> {
    let mut x = init;
    let mut mu = schedule.mu0;
    let mut mus = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = true;
    for round in 0..schedule.rounds.max(1) {
        let m = mu;
        let merit = SmoothProblem::new(
            problem.domain().clone(),
            move |x: &<P::Domain as Manifold>::Point| {
                let pen: f64 = problem.constraints(x).iter().map(|&g| g.max(0.0).powi(2)).sum();
                -(problem.objective(x) + m * pen)
            },
            move |x: &<P::Domain as Manifold>::Point| {
                let w: Vec<f64> = problem.constraints(x).iter().map(|&g| 2.0 * m * g.max(0.0)).collect();
                problem.domain().scale(&problem.gradient(x, &w), -1.0)
            },
        );
        let r = ascend(&merit, x, &schedule.inner)?;
        iterations += r.iterations;
        converged = r.converged;
        trace.push(-r.objective);
        x = r.point;
        mus.push(m);
        if schedule.stop_when_feasible
            && max_violation(&problem.constraints(&x)) <= schedule.tol_feas
            && round + 1 < schedule.rounds
        {
            break;
        }
        mu *= schedule.growth;
    }
    let viol = max_violation(&problem.constraints(&x));
    Ok(PenaltyReport {
        feasible: viol <= schedule.tol_feas,
        report: SolveReport {
            objective: problem.objective(&x),
            point: x,
            trace,
            iterations,
            converged,
            max_violation: viol,
        },
        mu: mus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVec;
    use crate::optim::manifold::ComplexEuclidean;
    use num_complex::Complex64 as C;

    struct Projection {
        constraints: Vec<(usize, f64, f64)>, // sign·Re(x_i) ≥ rhs
    }

    impl ConstrainedProblem for Projection {
        type Domain = ComplexEuclidean;

        fn domain(&self) -> &ComplexEuclidean {
            &ComplexEuclidean
        }

        fn objective(&self, x: &CVec) -> f64 {
            x.norm_squared()
        }

        fn constraints(&self, x: &CVec) -> Vec<f64> {
            self.constraints.iter().map(|&(i, s, r)| r - s * x[i].re).collect()
        }

        fn gradient(&self, x: &CVec, w: &[f64]) -> CVec {
            let mut g = x * C::new(2.0, 0.0);
            for (&(i, s, _), &wi) in self.constraints.iter().zip(w) {
                g[i] -= C::new(2.0 * s * wi, 0.0);
            }
            g
        }
    }

    #[test]
    fn projection_onto_halfspace() {
        let p = Projection {
            constraints: vec![(0, 1.0, 1.0)],
        };
        let init = CVec::from_vec(vec![C::new(0.0, 0.5), C::new(0.3, -0.2), C::new(0.0, 0.0)]);
        let r = penalty_solve(&p, init, &PenaltySchedule::default()).unwrap();
        assert!(r.feasible, "violation {}", r.report.max_violation);
        assert!((r.report.objective - 1.0).abs() < 1e-3);
        assert!((r.report.point[0] - C::new(1.0, 0.0)).norm() < 1e-3);
        assert!(r.report.point.iter().skip(1).all(|z| z.norm() < 1e-6));
        assert_eq!(r.mu, vec![1.0, 10.0, 100.0, 1e3, 1e4]);
    }

    #[test]
    fn unconstrained_matches_plain_ascent() {
        let p = Projection { constraints: vec![] };
        let init = CVec::from_vec(vec![C::new(0.7, 0.5)]);
        let r = penalty_solve(&p, init.clone(), &PenaltySchedule::default()).unwrap();
        let plain = SmoothProblem::new(
            ComplexEuclidean,
            |x: &CVec| -x.norm_squared(),
            |x: &CVec| x * C::new(-2.0, 0.0),
        );
        let a = ascend(&plain, init, &AscentOptions::default()).unwrap();
        assert!((r.report.objective + a.objective).abs() < 1e-12);
        assert!(r.feasible);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        let p = Projection {
            constraints: vec![(0, 1.0, 1.0), (0, -1.0, 1.0)],
        };
        let r = penalty_solve(&p, CVec::zeros(1), &PenaltySchedule::default()).unwrap();
        assert!(!r.feasible);
        assert!(r.report.max_violation > 0.5);
    }
}
