//! Worst-case leakage under a bounded error on the eavesdropper channels.

use num_complex::Complex64;
use rand::Rng;

use super::metrics::{leakage_gradient, leakage_terms};
use crate::channel::complex_gaussian;
use crate::error::{dimension, domain, Result};
use crate::linalg::{fro2, CMat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseOptions {
    /// Random points on the error sphere evaluated before the local search.
    pub samples: usize,
    /// Projected-gradient iterations per (eavesdropper, user) pair.
    pub iterations: usize,
}

impl Default for WorstCaseOptions {
    fn default() -> Self {
        WorstCaseOptions {
            samples: 32,
            iterations: 100,
        }
    }
}

/// `count` errors drawn uniformly on the sphere `‖Δ‖_F = radius`.
pub fn sample_boundary_errors<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Vec<CMat> {
    (0..count)
        .map(|_| {
            let d = CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng));
            let n = fro2(&d).sqrt();
            d * Complex64::new(radius / n, 0.0)
        })
        .collect()
}

fn project_ball(d: CMat, radius: f64) -> CMat {
    let n = fro2(&d).sqrt();
    if n > radius {
        d * Complex64::new(radius / n, 0.0)
    } else {
        d
    }
}

fn user_leakage(e: &CMat, w: &CMat, v: &CMat, noise: f64, k: usize) -> Result<f64> {
    Ok(leakage_terms(e, w, v, noise)?[k].value)
}

/// Projected-gradient ascent of one user's leakage over `‖Δ‖_F ≤ radius`.
fn local_search(
    e: &CMat,
    start: CMat,
    radius: f64,
    w: &CMat,
    v: &CMat,
    noise: f64,
    k: usize,
    iterations: usize,
) -> Result<f64> {
    let mut weights = vec![0.0; w.ncols()];
    weights[k] = 1.0;
    let mut delta = start;
    let mut f = user_leakage(&(e + &delta), w, v, noise, k)?;
    let mut step = f64::NAN;
    for _ in 0..iterations {
        let pert = e + &delta;
        let terms = leakage_terms(&pert, w, v, noise)?;
        let (_, _, g) = leakage_gradient(&pert, w, v, &terms, &weights);
        let gn = fro2(&g).sqrt();
        if !(gn > 0.0) {
            break;
        }
        if step.is_nan() {
            step = radius / gn;
        }
        let mut improved = false;
        for _ in 0..30 {
            let cand = project_ball(&delta + &g * Complex64::new(step, 0.0), radius);
            let fc = user_leakage(&(e + &cand), w, v, noise, k)?;
            if fc > f {
                improved = fc - f > 1e-12 * f.abs();
                delta = cand;
                f = fc;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(f)
}

/// Largest leakage over all users, eavesdroppers and errors `‖Δ_e‖_F ≤ radius`.
///
/// Evaluates `opts.samples` random boundary errors per eavesdropper, then runs
/// a projected-gradient ascent per user from the best of those samples and from
/// the boundary point along the leakage gradient at `Δ = 0`. The value never
/// falls below the nominal leakage.
pub fn worst_case_leakage<R: Rng + ?Sized>(
    h_e: &[CMat],
    radius: f64,
    w: &CMat,
    v: &CMat,
    noise: f64,
    opts: &WorstCaseOptions,
    rng: &mut R,
) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(domain("uncertainty radius must be non-negative"));
    }
    if !(noise > 0.0) {
        return Err(domain("noise power must be positive"));
    }
    let mut worst: f64 = 0.0;
    for e in h_e {
        if e.ncols() != w.nrows() {
            return Err(dimension("eavesdropper channel does not match the antenna count"));
        }
        let nominal = leakage_terms(e, w, v, noise)?;
        worst = nominal.iter().fold(worst, |m, l| m.max(l.value));
        if radius == 0.0 || w.ncols() == 0 {
            continue;
        }
        let samples = sample_boundary_errors(e.nrows(), e.ncols(), radius, opts.samples, rng);
        let mut best: Vec<(f64, Option<&CMat>)> = vec![(f64::NEG_INFINITY, None); w.ncols()];
        for d in &samples {
            for (k, l) in leakage_terms(&(e + d), w, v, noise)?.iter().enumerate() {
                if l.value > best[k].0 {
                    best[k] = (l.value, Some(d));
                }
            }
        }
        for (k, (val, d)) in best.into_iter().enumerate() {
            worst = worst.max(val);
            let mut weights = vec![0.0; w.ncols()];
            weights[k] = 1.0;
            let (_, _, g0) = leakage_gradient(e, w, v, &nominal, &weights);
            let gn = fro2(&g0).sqrt();
            let mut starts = Vec::new();
            if gn > 0.0 {
                starts.push(&g0 * Complex64::new(radius / gn, 0.0));
            }
            if let Some(d) = d {
                starts.push(d.clone());
            }
            for s in starts {
                worst = worst.max(local_search(e, s, radius, w, v, noise, k, opts.iterations)?);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::scenarios::leakage_sinr;

    #[test]
    fn boundary_samples_lie_on_the_sphere() {
        let s = sample_boundary_errors(2, 3, 0.7, 10, &mut stream(1));
        assert!(s.iter().all(|d| (fro2(d).sqrt() - 0.7).abs() < 1e-12));
    }

    #[test]
    fn zero_radius_is_nominal() {
        let mut rng = stream(2);
        let e = CMat::from_fn(2, 3, |_, _| complex_gaussian(&mut rng));
        let w = CMat::from_fn(3, 2, |_, _| complex_gaussian(&mut rng));
        let v = CMat::zeros(3, 0);
        let nominal = leakage_sinr(&[e.clone()], &w, &v, 1.0).unwrap()[0]
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let wc = worst_case_leakage(&[e], 0.0, &w, &v, 1.0, &WorstCaseOptions::default(), &mut rng).unwrap();
        assert_eq!(wc, nominal);
    }

    #[test]
    fn never_below_nominal() {
        let mut rng = stream(3);
        for _ in 0..10 {
            let e = CMat::from_fn(2, 4, |_, _| complex_gaussian(&mut rng));
            let w = CMat::from_fn(4, 2, |_, _| complex_gaussian(&mut rng));
            let v = CMat::from_fn(4, 4, |_, _| complex_gaussian(&mut rng) * 0.3);
            let nominal = leakage_sinr(&[e.clone()], &w, &v, 1.0).unwrap()[0]
                .iter()
                .copied()
                .fold(0.0, f64::max);
            let wc = worst_case_leakage(&[e], 0.5, &w, &v, 1.0, &WorstCaseOptions::default(), &mut rng).unwrap();
            assert!(wc >= nominal);
        }
    }

    #[test]
    fn single_antenna_closed_form() {
        let mut rng = stream(4);
        for _ in 0..20 {
            let h = CMat::from_fn(1, 4, |_, _| complex_gaussian(&mut rng));
            let w = CMat::from_fn(4, 1, |_, _| complex_gaussian(&mut rng));
            let eps = 0.3;
            let noise = 0.5;
            let exact = ((&h * &w)[0].norm() + eps * w.norm()).powi(2) / noise;
            let wc = worst_case_leakage(
                &[h],
                eps,
                &w,
                &CMat::zeros(4, 0),
                noise,
                &WorstCaseOptions::default(),
                &mut rng,
            )
            .unwrap();
            assert!((wc - exact).abs() <= 0.01 * exact, "{wc} vs {exact}");
            assert!(wc <= exact * (1.0 + 1e-9));
        }
    }
}
