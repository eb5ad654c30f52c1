//! Reactance-network surfaces.
//!
//! The surface is a lossless reciprocal multiport terminated by a tunable
//! network `Z = jX` with `X` real symmetric. Its scattering matrix
//! `Θ = (jX − Z0·I)(jX + Z0·I)⁻¹` is symmetric and unitary for every such `X`,
//! so optimising over `X` never leaves the feasible set.

use std::ops::Range;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ScatteringMatrix;
use crate::error::{dimension, domain, Error, Result};
use crate::linalg::{CMat, J};
use num_complex::Complex64;

pub const DEFAULT_REFERENCE_IMPEDANCE: f64 = 50.0;

/// How the surface elements are wired together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    /// No inter-element connections; `X` is diagonal.
    Single,
    /// Every element connected to every other.
    Full,
    /// Contiguous groups of the given sizes, fully connected within a group.
    Partial { groups: Vec<usize> },
}

impl Connectivity {
    /// Contiguous element ranges of each group for a surface of `l` elements.
    pub fn groups(&self, l: usize) -> Result<Vec<Range<usize>>> {
        match self {
            Connectivity::Single => Ok((0..l).map(|i| i..i + 1).collect()),
            Connectivity::Full => Ok(vec![0..l]),
            Connectivity::Partial { groups } => {
                if groups.iter().any(|&g| g == 0) || groups.iter().sum::<usize>() != l {
                    return Err(domain(format!("group sizes {groups:?} do not partition {l} elements")));
                }
                let mut off = 0;
                Ok(groups
                    .iter()
                    .map(|&g| {
                        let r = off..off + g;
                        off += g;
                        r
                    })
                    .collect())
            }
        }
    }

    /// Equal groups of `size` (the last one possibly smaller).
    pub fn partial_uniform(l: usize, size: usize) -> Connectivity {
        let size = size.max(1);
        let mut groups = vec![size; l / size];
        if l % size != 0 {
            groups.push(l % size);
        }
        Connectivity::Partial { groups }
    }

    /// `mask[(a, b)]` is true where `X` may be non-zero.
    pub fn mask(&self, l: usize) -> Result<DMatrix<bool>> {
        let mut m = DMatrix::from_element(l, l, false);
        for g in self.groups(l)? {
            for a in g.clone() {
                for b in g.clone() {
                    m[(a, b)] = true;
                }
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InwConfig {
    connectivity: Connectivity,
    reactance: DMatrix<f64>,
    z0: f64,
}

impl InwConfig {
    /// Validates symmetry and the block pattern of `reactance` (in Ohms).
    pub fn new(connectivity: Connectivity, reactance: DMatrix<f64>, z0: f64) -> Result<Self> {
        if !(z0 > 0.0) || !z0.is_finite() {
            return Err(domain("reference impedance must be positive"));
        }
        let l = reactance.nrows();
        if reactance.ncols() != l {
            return Err(dimension("reactance matrix must be square"));
        }
        if reactance.iter().any(|x| !x.is_finite()) {
            return Err(domain("reactance entries must be finite"));
        }
        if reactance != reactance.transpose() {
            return Err(domain("reactance matrix is not symmetric"));
        }
        let mask = connectivity.mask(l)?;
        if reactance.iter().zip(mask.iter()).any(|(x, &m)| !m && *x != 0.0) {
            return Err(domain("reactance matrix violates the connectivity pattern"));
        }
        Ok(InwConfig {
            connectivity,
            reactance,
            z0,
        })
    }

    /// Single-connected network reproducing the given element phases.
    pub fn from_phases(phases: &[f64], z0: f64) -> Result<Self> {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            phases.len(),
            phases.iter().map(|&t| reactance_for_phase(t, z0)),
        ));
        InwConfig::new(Connectivity::Single, x, z0)
    }

    /// Same reactance viewed under a (coarser) connectivity pattern.
    pub fn with_connectivity(&self, connectivity: Connectivity) -> Result<Self> {
        InwConfig::new(connectivity, self.reactance.clone(), self.z0)
    }

    pub fn connectivity(&self) -> &Connectivity {
        &self.connectivity
    }

    pub fn reactance(&self) -> &DMatrix<f64> {
        &self.reactance
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn size(&self) -> usize {
        self.reactance.nrows()
    }
}

/// Reactance of a single element whose reflection coefficient is `e^{jθ}`.
///
/// Phases at (or extremely near) zero need an unbounded reactance; the result
/// is clamped to `±1e12·Z0`, i.e. a phase error below `2e-12` rad.
pub fn reactance_for_phase(theta: f64, z0: f64) -> f64 {
    let half = (std::f64::consts::PI - crate::linalg::wrap_phase(theta)) / 2.0;
    let x = z0 * half.tan();
    x.clamp(-1e12 * z0, 1e12 * z0)
}

/// Phase of the single-element reflection `(jx − Z0)/(jx + Z0)`.
pub fn scattering_phase(x: f64, z0: f64) -> f64 {
    ((J * x - z0) / (J * x + z0)).arg()
}

fn resolvent(cfg: &InwConfig) -> Result<(CMat, CMat)> {
    let l = cfg.size();
    let jx: CMat = cfg.reactance.map(|x| Complex64::new(0.0, x));
    let plus = &jx + CMat::identity(l, l) * Complex64::from(cfg.z0);
    let minus = &jx - CMat::identity(l, l) * Complex64::from(cfg.z0);
    let mut q = CMat::zeros(l, l);
    for g in cfg.connectivity.groups(l)? {
        let n = g.len();
        let block = plus.view((g.start, g.start), (n, n)).clone_owned();
        let inv = block
            .try_inverse()
            .ok_or_else(|| Error::Conditioning("jX + Z0·I is singular".into()))?;
        q.view_mut((g.start, g.start), (n, n)).copy_from(&inv);
    }
    let theta = minus * &q;
    Ok((theta, q))
}

/// `Θ = (jX − Z0·I)(jX + Z0·I)⁻¹`, computed block by block.
pub fn reactance_to_scattering(cfg: &InwConfig) -> Result<ScatteringMatrix> {
    resolvent(cfg).map(|(t, _)| ScatteringMatrix(t))
}

/// Pulls a gradient with respect to `Θ` back to the free entries of `X`.
///
/// `grad_theta` is the Euclidean gradient `Γ` for which a perturbation `dΘ`
/// changes the objective by `Re tr(Γᴴ dΘ)`. Using `dΘ = j(I − Θ) dX Q` with
/// `Q = (jX + Z0·I)⁻¹`, the result is the symmetric, pattern-masked matrix
/// `G` such that the change is `tr(Gᵀ dX)` for every admissible `dX`.
pub fn reactance_gradient(cfg: &InwConfig, grad_theta: &CMat) -> Result<DMatrix<f64>> {
    let l = cfg.size();
    if grad_theta.shape() != (l, l) {
        return Err(dimension("gradient shape does not match the reactance matrix"));
    }
    let (theta, q) = resolvent(cfg)?;
    let m = q * grad_theta.adjoint() * (CMat::identity(l, l) - theta) * J;
    let e = m.map(|z| z.re).transpose();
    let mut g = (&e + e.transpose()) * 0.5;
    let mask = cfg.connectivity.mask(l)?;
    g.zip_apply(&mask, |x, keep| {
        if !keep {
            *x = 0.0
        }
    });
    Ok(g)
}

/// Adds i.i.d. Gaussian errors of standard deviation `sigma` (Ohms) to the
/// free entries of `X`, keeping symmetry and the wiring pattern.
pub fn perturb_reactance<R: Rng + ?Sized>(cfg: &InwConfig, sigma: f64, rng: &mut R) -> Result<InwConfig> {
    if !(sigma >= 0.0) {
        return Err(domain("reactance error deviation must be non-negative"));
    }
    let l = cfg.size();
    let mask = cfg.connectivity.mask(l)?;
    let mut x = cfg.reactance.clone();
    for a in 0..l {
        for b in a..l {
            if mask[(a, b)] {
                let e: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                x[(a, b)] += e;
                if a != b {
                    x[(b, a)] += e;
                }
            }
        }
    }
    InwConfig::new(cfg.connectivity.clone(), x, cfg.z0)
}
