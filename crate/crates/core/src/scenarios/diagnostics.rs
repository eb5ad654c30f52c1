//! Finite-difference probes of every smooth problem the case studies hand to
//! the optimisers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::metrics::{leakage_gradient, leakage_terms};
use super::secure::{pack, Links, PrecoderProblem, SurfaceObjective};
use super::swipt::{PowerProblem, Qos, RelaxedProblem};
use crate::channel::complex_gaussian;
use crate::error::Result;
use crate::irs_models::{reactance_gradient, reactance_to_scattering, Connectivity, InwConfig};
use crate::linalg::{CMat, CVec};
use crate::optim::gradcheck::{complex_gradient_error, symmetric_gradient_error, DEFAULT_FD_STEP};
use crate::optim::ConstrainedProblem;
use crate::rng::{derive, stream, Stream};

/// Largest relative gradient error of one problem over random points.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientProbe {
    pub problem: &'static str,
    pub points: usize,
    pub max_error: f64,
}

fn gaussian(rows: usize, cols: usize, rng: &mut Stream) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

fn vector(len: usize, rng: &mut Stream) -> CVec {
    CVec::from_fn(len, |_, _| complex_gaussian(rng))
}

fn weights(n: usize, rng: &mut Stream) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn penalised_error<P: ConstrainedProblem<Domain = crate::optim::ComplexEuclidean>>(
    p: &P,
    x: &CVec,
    rng: &mut Stream,
) -> f64 {
    let om = weights(p.constraints(x).len(), rng);
    let f = |y: &CVec| p.objective(y) + p.constraints(y).iter().zip(&om).map(|(g, w)| g * w).sum::<f64>();
    complex_gradient_error(f, &p.gradient(x, &om), x, DEFAULT_FD_STEP)
}

const NT: usize = 3;
const USERS: usize = 2;
const L: usize = 4;

fn random_links(rng: &mut Stream) -> Links {
    let rows = [1, 1, 2, 1];
    Links {
        direct: rows
            .iter()
            .map(|&r| gaussian(r, NT, rng) * Complex64::new(0.3, 0.0))
            .collect(),
        irs_to_rx: rows.iter().map(|&r| gaussian(r, L, rng)).collect(),
        tx_to_irs: gaussian(L, NT, rng) * Complex64::new(0.5, 0.0),
        users: USERS,
        nt: NT,
    }
}

fn random_precoder(rng: &mut Stream) -> (CMat, CMat) {
    (
        gaussian(NT, USERS, rng),
        gaussian(NT, NT, rng) * Complex64::new(0.3, 0.0),
    )
}

fn random_errors(links: &Links, rng: &mut Stream) -> Vec<Vec<CMat>> {
    links.direct[links.users..]
        .iter()
        .map(|e| {
            vec![
                CMat::zeros(e.nrows(), NT),
                gaussian(e.nrows(), NT, rng) * Complex64::new(0.2, 0.0),
            ]
        })
        .collect()
}

fn probe(
    name: &'static str,
    points: usize,
    seed: u64,
    mut one: impl FnMut(&mut Stream) -> Result<f64>,
) -> Result<GradientProbe> {
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let mut rng = stream(derive(seed, i as u64));
        worst = worst.max(one(&mut rng)?);
    }
    Ok(GradientProbe {
        problem: name,
        points,
        max_error: worst,
    })
}

/// Checks the analytic gradients of the secure precoder problem, the surface
/// objectives over phases and over reactances, the worst-case leakage over the
/// channel error, the SWIPT precoder problem and the relaxed mode selection.
pub fn gradient_probes(points: usize, seed: u64) -> Result<Vec<GradientProbe>> {
    let mut out = Vec::new();
    out.push(probe("secure precoder", points, derive(seed, 1), |rng| {
        let links = random_links(rng);
        let h = links.channels(&CMat::from_diagonal(&vector(L, rng)));
        let p = PrecoderProblem {
            users: h[..USERS].to_vec(),
            eavs: h[USERS..].to_vec(),
            cap: 0.2 + rng.random::<f64>(),
            nt: NT,
        };
        let (w, v) = random_precoder(rng);
        Ok(penalised_error(&p, &pack(&w, &v), rng))
    })?);
    out.push(probe("secure surface phases", points, derive(seed, 2), |rng| {
        let links = random_links(rng);
        let errors = random_errors(&links, rng);
        let (w, v) = random_precoder(rng);
        let obj = SurfaceObjective {
            links: &links,
            errors: &errors,
            w,
            v,
            cap: 0.2 + rng.random::<f64>(),
            mu: 10.0,
        };
        let x = CVec::from_fn(L, |_, _| {
            Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
        });
        let f = |y: &CVec| obj.value(&CMat::from_diagonal(y));
        let g = obj.gradient(&CMat::from_diagonal(&x)).diagonal();
        Ok(complex_gradient_error(f, &g, &x, DEFAULT_FD_STEP))
    })?);
    out.push(probe("secure surface reactance", points, derive(seed, 3), |rng| {
        let links = random_links(rng);
        let errors = random_errors(&links, rng);
        let (w, v) = random_precoder(rng);
        let obj = SurfaceObjective {
            links: &links,
            errors: &errors,
            w,
            v,
            cap: 0.2 + rng.random::<f64>(),
            mu: 10.0,
        };
        let conn = match rng.random_range(0..3) {
            0 => Connectivity::Single,
            1 => Connectivity::Full,
            _ => Connectivity::partial_uniform(L, 2),
        };
        let mask = conn.mask(L)?;
        let z0 = 50.0;
        let mut x = DMatrix::from_fn(L, L, |_, _| z0 * (rng.random::<f64>() - 0.5));
        x = (&x + x.transpose()) * 0.5;
        x.zip_apply(&mask, |v, m| {
            if !m {
                *v = 0.0
            }
        });
        let theta = |x: &DMatrix<f64>| -> Result<CMat> {
            Ok(reactance_to_scattering(&InwConfig::new(conn.clone(), x.clone(), z0)?)?.into_inner())
        };
        let f = |y: &DMatrix<f64>| theta(y).map_or(f64::NAN, |t| obj.value(&t));
        let cfg = InwConfig::new(conn.clone(), x.clone(), z0)?;
        let g = reactance_gradient(&cfg, &obj.gradient(&theta(&x)?))?;
        Ok(symmetric_gradient_error(f, &g, &x, &mask, DEFAULT_FD_STEP * z0))
    })?);
    out.push(probe("worst-case leakage error", points, derive(seed, 4), |rng| {
        let e = gaussian(2, NT, rng);
        let (w, v) = random_precoder(rng);
        let k = rng.random_range(0..USERS);
        let mut om = vec![0.0; USERS];
        om[k] = 1.0;
        let terms = leakage_terms(&e, &w, &v, 1.0)?;
        let (_, _, g) = leakage_gradient(&e, &w, &v, &terms, &om);
        let as_mat = |y: &CVec| CMat::from_column_slice(2, NT, y.as_slice());
        let f = |y: &CVec| leakage_terms(&as_mat(y), &w, &v, 1.0).map_or(f64::NAN, |t| t[k].value);
        let x = CVec::from_column_slice(e.as_slice());
        Ok(complex_gradient_error(
            f,
            &CVec::from_column_slice(g.as_slice()),
            &x,
            DEFAULT_FD_STEP,
        ))
    })?);
    out.push(probe("swipt precoder", points, derive(seed, 5), |rng| {
        let qos = Qos {
            gammas: (0..USERS).map(|_| 0.5 + 3.0 * rng.random::<f64>()).collect(),
            q: 0.5 + rng.random::<f64>(),
        };
        let p = PowerProblem {
            id: (0..USERS).map(|_| gaussian(1, NT, rng)).collect(),
            eh: (0..2).map(|_| gaussian(1, NT, rng)).collect(),
            qos: &qos,
            nt: NT,
        };
        Ok(penalised_error(&p, &vector(NT * USERS, rng), rng))
    })?);
    out.push(probe("swipt relaxed selection", points, derive(seed, 6), |rng| {
        let qos = Qos {
            gammas: (0..USERS).map(|_| 0.5 + 3.0 * rng.random::<f64>()).collect(),
            q: 0.5 + rng.random::<f64>(),
        };
        let rx = USERS + 2;
        let (tiles, modes) = (2, 3);
        let p = RelaxedProblem {
            base: (0..rx).map(|_| gaussian(1, NT, rng)).collect(),
            free: (0..tiles)
                .map(|_| {
                    (0..modes)
                        .map(|_| (0..rx).map(|_| gaussian(1, NT, rng)).collect())
                        .collect()
                })
                .collect(),
            info: USERS,
            qos: &qos,
            nt: NT,
            binarity: true,
        };
        let mut x = vector(p.len(), rng);
        for z in x.iter_mut().skip(NT * USERS) {
            z.im = 0.0;
        }
        Ok(penalised_error(&p, &x, rng))
    })?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_shipped_gradients_match_finite_differences() {
        for p in gradient_probes(100, 2024).unwrap() {
            assert!(p.max_error < 1e-5, "{}: {}", p.problem, p.max_error);
        }
    }
}
