//! Reflection models of a reconfigurable surface.
//!
//! Every model resolves to a [`ScatteringMatrix`] that
//! [`crate::channel::effective_channel`] consumes:
//!
//! * independent phase shifts give a diagonal unit-modulus operator
//!   ([`ids_to_reflection`]);
//! * a lossless reactance network gives a complex symmetric unitary operator
//!   ([`reactance_to_scattering`]), block diagonal for grouped wiring;
//! * the far-field scattering response of a phase profile is evaluated
//!   directly as a function of incidence and reflection direction
//!   ([`evaluate_grcs`]).
//!
//! Hardware impairments (finite-resolution phase shifters, random phase
//! errors, transceiver distortion) live in [`impairments`].

mod grcs;
pub mod impairments;
mod inw;

pub use grcs::{build_grcs_matrix, evaluate_grcs, evaluate_grcs_at, matched_profile, GrcsMatrix};
pub use impairments::{apply_phase_error, eevm_distortion_power, quantize_phases, Eevm, ImpairmentSpec, PhaseError};
pub use inw::{
    perturb_reactance, reactance_for_phase, reactance_gradient, reactance_to_scattering, scattering_phase,
    Connectivity, InwConfig, DEFAULT_REFERENCE_IMPEDANCE,
};

use std::ops::Range;

use crate::linalg::{cis, CMat};

/// Reflection operator `Θ` of a surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix(CMat);

impl ScatteringMatrix {
    pub fn new(theta: CMat) -> Self {
        ScatteringMatrix(theta)
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    /// `max |ΘΘᴴ − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.size();
        let g = &self.0 * self.0.adjoint() - CMat::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |Θ − Θᵀ|`.
    pub fn symmetry_error(&self) -> f64 {
        crate::linalg::max_abs_diff(&self.0, &self.0.transpose())
    }

    /// Largest magnitude outside the diagonal blocks given by `groups`.
    pub fn off_block_magnitude(&self, groups: &[Range<usize>]) -> f64 {
        let n = self.size();
        let mut owner = vec![usize::MAX; n];
        for (g, r) in groups.iter().enumerate() {
            for i in r.clone() {
                owner[i] = g;
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if owner[i] != owner[j] || owner[i] == usize::MAX {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Diagonal phase-shift operator `diag(e^{jθ_1}, …, e^{jθ_L})`.
pub fn ids_to_reflection(phases: &[f64]) -> ScatteringMatrix {
    let n = phases.len();
    let mut m = CMat::zeros(n, n);
    for (l, &t) in phases.iter().enumerate() {
        m[(l, l)] = cis(t);
    }
    ScatteringMatrix(m)
}
