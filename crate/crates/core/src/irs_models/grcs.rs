//! Far-field scattering response of a phase profile.

use std::f64::consts::PI;

use crate::channel::{Direction, Layout};
use crate::error::{dimension, domain, Result};
use crate::linalg::{cis, wrap_phase, CMat};
use num_complex::Complex64;

/// `g = A · Σ_l exp(j(θ_l + 2π·spacing·⟨dir_t + dir_r, p_l⟩))` over explicit
/// element offsets `p_l`.
pub fn evaluate_grcs_at(
    profile: &[f64],
    offsets: &[[f64; 2]],
    spacing: f64,
    amplitude: f64,
    aoa: Direction,
    aod: Direction,
) -> Result<Complex64> {
    aoa.validate()?;
    aod.validate()?;
    if profile.len() != offsets.len() {
        return Err(dimension(format!(
            "profile has {} phases for {} elements",
            profile.len(),
            offsets.len()
        )));
    }
    if !(amplitude > 0.0) || !(spacing > 0.0) {
        return Err(domain("element amplitude and spacing must be positive"));
    }
    let u = aoa.combined(&aod);
    let sum: Complex64 = profile
        .iter()
        .zip(offsets)
        .map(|(t, p)| cis(t + 2.0 * PI * spacing * (u[0] * p[0] + u[1] * p[1])))
        .sum();
    Ok(sum * amplitude)
}

/// Scattering response of a whole surface with the given layout.
pub fn evaluate_grcs(
    profile: &[f64],
    layout: &Layout,
    spacing: f64,
    amplitude: f64,
    aoa: Direction,
    aod: Direction,
) -> Result<Complex64> {
    evaluate_grcs_at(profile, &layout.offsets(), spacing, amplitude, aoa, aod)
}

/// Linear phase profile that cancels the propagation phase for the pair
/// `(aoa, aod)`, so the response there has magnitude `A·L`.
pub fn matched_profile(offsets: &[[f64; 2]], spacing: f64, aoa: Direction, aod: Direction) -> Vec<f64> {
    let u = aoa.combined(&aod);
    offsets
        .iter()
        .map(|p| wrap_phase(-2.0 * PI * spacing * (u[0] * p[0] + u[1] * p[1])))
        .collect()
}

/// Response sampled on an incidence × reflection grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GrcsMatrix {
    /// Row `i` is incidence `aoa_grid[i]`, column `k` is reflection `aod_grid[k]`.
    pub values: CMat,
    pub amplitude: f64,
    pub aoa_grid: Vec<Direction>,
    pub aod_grid: Vec<Direction>,
}

pub fn build_grcs_matrix(
    profile: &[f64],
    layout: &Layout,
    spacing: f64,
    amplitude: f64,
    aoa_grid: &[Direction],
    aod_grid: &[Direction],
) -> Result<GrcsMatrix> {
    if aoa_grid.is_empty() || aod_grid.is_empty() {
        return Err(domain("GRCS grids must be non-empty"));
    }
    let offsets = layout.offsets();
    let mut values = CMat::zeros(aoa_grid.len(), aod_grid.len());
    for (i, &t) in aoa_grid.iter().enumerate() {
        for (k, &r) in aod_grid.iter().enumerate() {
            values[(i, k)] = evaluate_grcs_at(profile, &offsets, spacing, amplitude, t, r)?;
        }
    }
    Ok(GrcsMatrix {
        values,
        amplitude,
        aoa_grid: aoa_grid.to_vec(),
        aod_grid: aod_grid.to_vec(),
    })
}
