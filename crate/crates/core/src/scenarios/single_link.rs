//! Single-user link with a phase-shift surface and hardware impairments.

use num_complex::Complex64;

use super::metrics::impaired_snr;
use crate::channel::ChannelSet;
use crate::error::{dimension, domain, Result};
use crate::irs_models::ImpairmentSpec;
use crate::linalg::{cis, wrap_phase, CMat, CVec};
use crate::optim::{alternating_optimize, AoOptions, Block};
use crate::rng::{derive, purpose, stream};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SingleLinkOptions {
    pub ao: AoOptions,
    pub impairments: ImpairmentSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleLinkSolution {
    /// Unit-norm beamformer (the transmit power multiplies it).
    pub w: CVec,
    /// Phases chosen by the optimiser.
    pub phases: Vec<f64>,
    /// Phases after quantisation and random phase error.
    pub realised_phases: Vec<f64>,
    /// `P|hᴴw|²/σ²` at the optimised phases.
    pub ideal_snr: f64,
    /// SNR with the realised phases and transceiver distortion.
    pub snr: f64,
    pub sweeps: usize,
    pub trace: Vec<f64>,
}

struct Link {
    direct: CMat,
    irs_to_rx: CMat,
    tx_to_irs: CMat,
}

impl Link {
    fn channel(&self, phases: &[f64]) -> CVec {
        let mut h = self.direct.row(0).transpose();
        if !phases.is_empty() {
            let theta = CVec::from_iterator(phases.len(), phases.iter().map(|&p| cis(p)));
            let b = self.irs_to_rx.row(0).transpose().component_mul(&theta);
            h += self.tx_to_irs.transpose() * b;
        }
        h
    }

    /// `|h(θ)ᵀw|²`.
    fn gain(&self, w: &CVec, phases: &[f64]) -> f64 {
        self.channel(phases).dot(w).norm_sqr()
    }
}

/// Maximises the SNR of receiver `rx` by alternating matched filtering and
/// coherent phase alignment, then evaluates the impaired SNR of the realised
/// phases (quantisation, then random phase error from the seed's phase-error
/// stream).
pub fn solve_single_link(
    cs: &ChannelSet,
    rx: usize,
    power: f64,
    seed: u64,
    opts: &SingleLinkOptions,
) -> Result<SingleLinkSolution> {
    cs.validate()?;
    if !(power > 0.0) {
        return Err(domain("transmit power must be positive"));
    }
    if rx >= cs.rx_count() || cs.direct[rx].nrows() != 1 {
        return Err(dimension(format!("receiver {rx} must exist and have a single antenna")));
    }
    let stacked = if cs.irs_count() > 1 { cs.stacked() } else { cs.clone() };
    let nt = cs.tx_antennas();
    let link = Link {
        direct: cs.direct[rx].clone(),
        irs_to_rx: stacked.irs_to_rx.first().map_or(CMat::zeros(1, 0), |m| m[rx].clone()),
        tx_to_irs: stacked.tx_to_irs.first().cloned().unwrap_or(CMat::zeros(0, nt)),
    };
    let l = link.tx_to_irs.nrows();

    let matched = |phases: &[f64]| -> CVec {
        let h = link.channel(phases).conjugate();
        let n = h.norm();
        if n > 0.0 {
            h / Complex64::new(n, 0.0)
        } else {
            let mut e = CVec::zeros(nt);
            e[0] = Complex64::new(1.0, 0.0);
            e
        }
    };
    let align = |w: &CVec| -> Vec<f64> {
        let reference = (link.direct.row(0) * w)[0];
        let r = if reference.norm() > 0.0 { reference.arg() } else { 0.0 };
        let aw = &link.tx_to_irs * w;
        (0..l)
            .map(|i| {
                let c = link.irs_to_rx[(0, i)] * aw[i];
                wrap_phase(if c.norm() > 0.0 { r - c.arg() } else { 0.0 })
            })
            .collect()
    };

    let phases0 = vec![0.0; l];
    let init = (matched(&phases0), phases0);
    let objective = |s: &(CVec, Vec<f64>)| link.gain(&s.0, &s.1);
    let (state, sweeps, trace) = if l == 0 {
        let g = objective(&init);
        (init, 0, vec![g])
    } else {
        let mut blocks = vec![
            Block::new("beamformer", |s: &(CVec, Vec<f64>)| Ok((matched(&s.1), s.1.clone()))),
            Block::new("phases", |s: &(CVec, Vec<f64>)| Ok((s.0.clone(), align(&s.0)))),
        ];
        let r = alternating_optimize(init, &mut blocks, objective, &opts.ao)?;
        (r.state, r.sweeps, r.trace)
    };
    let (w, phases) = state;
    let noise = cs.noise_power;
    let ideal_snr = power * link.gain(&w, &phases) / noise;

    let mut rng = stream(derive(seed, purpose::PHASE_ERROR));
    let realised_phases = opts.impairments.realise(&phases, &mut rng)?;
    let s = power * link.gain(&w, &realised_phases);
    let snr = impaired_snr(s, noise, opts.impairments.eevm.kappa_tx, opts.impairments.eevm.kappa_rx)?;
    Ok(SingleLinkSolution {
        w,
        phases,
        realised_phases,
        ideal_snr,
        snr,
        sweeps,
        trace: trace.iter().map(|g| power * g / noise).collect(),
    })
}

/// Coherent-alignment optimum `P‖t‖²(Σ_l |b_l g_l|)²/σ²` for a blocked direct
/// link and a rank-one transmitter-to-surface channel `g tᴴ`.
pub fn single_link_snr_bound(b: &[Complex64], g: &[Complex64], t: &[Complex64], power: f64, noise: f64) -> f64 {
    let s: f64 = b.iter().zip(g).map(|(x, y)| (x * y).norm()).sum();
    let tn: f64 = t.iter().map(|z| z.norm_sqr()).sum();
    power * tn * s * s / noise
}
