//! Hardware impairments: finite-resolution phase shifters, random phase
//! errors, and transceiver distortion noise proportional to signal power.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::wrap_phase;

/// Random phase error added to every element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PhaseError {
    #[default]
    None,
    /// Uniform on `[-half_width, half_width]` radians.
    Uniform { half_width: f64 },
    /// Von Mises with concentration `kappa` around zero.
    VonMises { kappa: f64 },
}

/// Distortion-to-signal power ratios at transmitter and receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Eevm {
    pub kappa_tx: f64,
    pub kappa_rx: f64,
}

impl Eevm {
    pub fn total(&self) -> f64 {
        self.kappa_tx + self.kappa_rx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ImpairmentSpec {
    /// Phase-shifter resolution in bits; 0 means continuous.
    pub quantization_bits: u32,
    pub phase_error: PhaseError,
    pub eevm: Eevm,
}

impl ImpairmentSpec {
    pub fn is_ideal(&self) -> bool {
        self.quantization_bits == 0 && self.phase_error == PhaseError::None && self.eevm.total() == 0.0
    }

    /// Phases actually realised by the hardware: quantised, then perturbed.
    pub fn realise<R: Rng + ?Sized>(&self, phases: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let q = if self.quantization_bits == 0 {
            phases.to_vec()
        } else {
            quantize_phases(phases, self.quantization_bits)?
        };
        apply_phase_error(&q, &self.phase_error, rng)
    }
}

/// Maps every phase to the nearest of the `2^bits` levels `2πi/2^bits`
/// (circular distance, ties to the lower level index).
pub fn quantize_phases(phases: &[f64], bits: u32) -> Result<Vec<f64>> {
    if bits == 0 || bits > 30 {
        return Err(domain(format!("quantisation needs 1..=30 bits, got {bits}")));
    }
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    Ok(phases
        .iter()
        .map(|&t| {
            let x = wrap_phase(t) / step;
            let lo = x.floor();
            let frac = x - lo;
            let lo = lo as u64 % levels;
            let hi = (lo + 1) % levels;
            let idx = if frac < 0.5 {
                lo
            } else if frac > 0.5 {
                hi
            } else {
                lo.min(hi)
            };
            idx as f64 * step
        })
        .collect())
}

/// Von Mises sample around zero (Best & Fisher rejection sampler).
pub fn sample_von_mises<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return rng.random_range(-PI..PI);
    }
    let a = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let b = (a - (2.0 * a).sqrt()) / (2.0 * kappa);
    let r = (1.0 + b * b) / (2.0 * b);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let theta = f.clamp(-1.0, 1.0).acos();
            return if u3 > 0.5 { theta } else { -theta };
        }
    }
}

/// `θ̃_l = θ_l + ε_l mod 2π` with i.i.d. errors drawn from `spec`.
pub fn apply_phase_error<R: Rng + ?Sized>(phases: &[f64], spec: &PhaseError, rng: &mut R) -> Result<Vec<f64>> {
    match *spec {
        PhaseError::None => Ok(phases.to_vec()),
        PhaseError::Uniform { half_width } => {
            if !(half_width >= 0.0) {
                return Err(domain("uniform phase error half-width must be non-negative"));
            }
            if half_width == 0.0 {
                return Ok(phases.to_vec());
            }
            Ok(phases
                .iter()
                .map(|&t| wrap_phase(t + rng.random_range(-half_width..=half_width)))
                .collect())
        }
        PhaseError::VonMises { kappa } => {
            if !(kappa >= 0.0) {
                return Err(domain("von Mises concentration must be non-negative"));
            }
            Ok(phases
                .iter()
                .map(|&t| wrap_phase(t + sample_von_mises(kappa, rng)))
                .collect())
        }
    }
}

/// Distortion power `κ·S` of the extended error-vector-magnitude model.
pub fn eevm_distortion_power(signal_power: f64, kappa: f64) -> f64 {
    kappa * signal_power
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cis;
    use crate::rng::stream;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quantization_examples() {
        assert_eq!(quantize_phases(&[0.3 * PI], 1).unwrap(), vec![0.0]);
        assert!((quantize_phases(&[0.3 * PI], 2).unwrap()[0] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(quantize_phases(&[FRAC_PI_2], 1).unwrap(), vec![0.0]);
        // wrap-around tie between the last level and level 0
        assert_eq!(quantize_phases(&[1.5 * PI], 1).unwrap(), vec![0.0]);
        assert!(quantize_phases(&[0.1], 0).is_err());
    }

    fn circ(a: f64, b: f64) -> f64 {
        let d = wrap_phase(a - b);
        d.min(TAU - d)
    }

    proptest! {
        #[test]
        fn quantization_error_bound(theta in -20.0f64..20.0, bits in 1u32..8) {
            let q = quantize_phases(&[theta], bits).unwrap()[0];
            prop_assert!(circ(q, theta) <= PI / (1u64 << bits) as f64 + 1e-12);
        }
    }

    #[test]
    fn degenerate_errors_are_identity() {
        let p = vec![0.1, 2.0, 6.0];
        let mut rng = stream(0);
        assert_eq!(apply_phase_error(&p, &PhaseError::None, &mut rng).unwrap(), p);
        assert_eq!(
            apply_phase_error(&p, &PhaseError::Uniform { half_width: 0.0 }, &mut rng).unwrap(),
            p
        );
        assert!(apply_phase_error(&p, &PhaseError::Uniform { half_width: -1.0 }, &mut rng).is_err());
        assert!(apply_phase_error(&p, &PhaseError::VonMises { kappa: -1.0 }, &mut rng).is_err());
        let spec = ImpairmentSpec::default();
        assert!(spec.is_ideal());
        assert_eq!(spec.realise(&p, &mut rng).unwrap(), p);
    }

    fn mean_phasor(spec: PhaseError, n: usize, seed: u64) -> Complex64 {
        let mut rng = stream(seed);
        let z = vec![0.0; n];
        let e = apply_phase_error(&z, &spec, &mut rng).unwrap();
        e.iter().map(|&t| cis(t)).sum::<Complex64>() / n as f64
    }

    #[test]
    fn uniform_full_width_has_zero_mean_phasor() {
        let m = mean_phasor(PhaseError::Uniform { half_width: PI }, 100_000, 1);
        assert!(m.norm() < 0.02, "{m}");
    }

    #[test]
    fn von_mises_moments() {
        // E[cos ε] = I1(κ)/I0(κ); 0.697775 for κ = 2, 0.948600 for κ = 10
        for (kappa, expect) in [(2.0, 0.697_775), (10.0, 0.948_600)] {
            let m = mean_phasor(PhaseError::VonMises { kappa }, 100_000, 3);
            assert!((m.re - expect).abs() < 0.01, "κ={kappa}: {m}");
            assert!(m.im.abs() < 0.01);
        }
        let m = mean_phasor(PhaseError::VonMises { kappa: 0.0 }, 100_000, 4);
        assert!(m.norm() < 0.02);
    }

    #[test]
    fn eevm_examples() {
        assert_eq!(eevm_distortion_power(1.0, 0.0), 0.0);
        assert!((eevm_distortion_power(2.0, 0.01) - 0.02).abs() < 1e-18);
        assert_eq!(eevm_distortion_power(0.0, 0.3), 0.0);
    }
}
