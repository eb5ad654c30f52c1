//! Transmit-power minimisation for simultaneous wireless information and
//! power transfer with a tile/mode surface.
//!
//! Information receivers need `SINR_k ≥ Γ_k`, energy receivers need
//! `η‖h_eᴴW‖² ≥ P_min`; the precoder `W` and one transmission mode per tile
//! are chosen to minimise `‖W‖²`. No artificial noise is sent. For a fixed
//! selection the precoder is found by a quadratic-penalty solve started from
//! the cheaper of a minimally scaled zero-forcing and matched-filter precoder,
//! followed by minimal rescaling.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BeamformingSolution, IrsConfiguration};
use crate::codebook::{select_effective_channel, EffectiveTileChannels, ModeSelection};
use crate::error::{dimension, domain, Error, Result};
use crate::linalg::{fro2, CMat, CVec};
use crate::optim::{
    branch_and_bound, exhaustive_select, max_violation, penalty_solve, BnbOptions, ComplexEuclidean,
    ConstrainedProblem, InnerOutcome, PenaltySchedule, SelectionOptions, SelectionProblem, DEFAULT_ENUMERATION_CAP,
};
use crate::parallel::Execution;
use crate::rng::{derive, purpose, stream};

pub const DEFAULT_EH_EFFICIENCY: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SwiptScenario {
    /// Receiver indices of the single-antenna information receivers.
    pub info_receivers: Vec<usize>,
    /// Linear SINR targets, one per information receiver.
    pub sinr_targets: Vec<f64>,
    /// Receiver indices of the single-antenna energy receivers.
    pub energy_receivers: Vec<usize>,
    /// Watts, per energy receiver.
    pub min_harvested: f64,
    /// Linear harvesting efficiency in `(0, 1]`.
    pub efficiency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwiptMethod {
    /// Branch-and-bound over modes.
    Bnb,
    /// Softmax relaxation of the selection with a binarity penalty, then rounding.
    Penalty,
    Exhaustive,
    /// One uniformly drawn selection.
    Random,
    /// Direct links only.
    None,
}

/// Lower bound used by branch-and-bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Valid bound from the largest channel norm any completion can reach.
    #[default]
    ChannelGain,
    /// Relaxed-selection solve over the free tiles; heuristic, may over-prune.
    Relaxation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwiptOptions {
    pub penalty: PenaltySchedule,
    pub bound: BoundKind,
    pub cap: u128,
    /// Used by exhaustive enumeration.
    pub execution: Execution,
}

impl Default for SwiptOptions {
    fn default() -> Self {
        let mut penalty = PenaltySchedule {
            stop_when_feasible: true,
            ..PenaltySchedule::default()
        };
        penalty.inner.max_iter = 200;
        penalty.inner.tol = 1e-7;
        penalty.inner.f_tol = 1e-12;
        SwiptOptions {
            penalty,
            bound: BoundKind::ChannelGain,
            cap: DEFAULT_ENUMERATION_CAP,
            execution: Execution::Sequential,
        }
    }
}

/// QoS constraints in noise-normalised units.
#[derive(Debug, Clone)]
pub(crate) struct Qos {
    pub gammas: Vec<f64>,
    /// `P_min / (η σ²)`.
    pub q: f64,
}

impl Qos {
    /// Relative constraint values `g ≤ 0`: interference-plus-noise minus
    /// signal over target per information receiver, then `1 − ‖h_e W‖²/q`.
    pub fn constraints(&self, id: &[CMat], eh: &[CMat], w: &CMat) -> Vec<f64> {
        let mut g = Vec::with_capacity(id.len() + eh.len());
        for (k, h) in id.iter().enumerate() {
            let hw = h * w;
            let total: f64 = hw.iter().map(|z| z.norm_sqr()).sum();
            let s = hw[k].norm_sqr();
            g.push(total - s + 1.0 - s / self.gammas[k]);
        }
        for h in eh {
            g.push(1.0 - fro2(&(h * w)) / self.q);
        }
        g
    }

    /// Weighted constraint gradients with respect to `W` and each channel row.
    pub fn gradient(&self, id: &[CMat], eh: &[CMat], w: &CMat, weights: &[f64]) -> (CMat, Vec<CMat>, Vec<CMat>) {
        let two = Complex64::new(2.0, 0.0);
        let mut gw = CMat::zeros(w.nrows(), w.ncols());
        let mut gid = Vec::with_capacity(id.len());
        for (k, h) in id.iter().enumerate() {
            let om = weights[k];
            let hw = h * w;
            let mut s = vec![om; w.ncols()];
            s[k] = -om / self.gammas[k];
            let mut gh = CMat::zeros(1, w.nrows());
            for j in 0..w.ncols() {
                if s[j] == 0.0 {
                    continue;
                }
                let c = two * s[j] * hw[j];
                gw.column_mut(j)
                    .axpy(c, &h.adjoint().column(0), Complex64::new(1.0, 0.0));
                gh += w.column(j).adjoint() * c;
            }
            gid.push(gh);
        }
        let mut geh = Vec::with_capacity(eh.len());
        for (e, h) in eh.iter().enumerate() {
            let c = Complex64::new(-2.0 * weights[id.len() + e] / self.q, 0.0);
            let hw = h * w;
            gw += h.adjoint() * &hw * c;
            geh.push(&hw * w.adjoint() * c);
        }
        (gw, gid, geh)
    }

    /// Smallest `c²` such that `c·W` meets every constraint.
    pub fn min_scale2(&self, id: &[CMat], eh: &[CMat], w: &CMat) -> Option<f64> {
        let mut c2: f64 = 0.0;
        for (k, h) in id.iter().enumerate() {
            let hw = h * w;
            let total: f64 = hw.iter().map(|z| z.norm_sqr()).sum();
            let a = hw[k].norm_sqr();
            let margin = a - self.gammas[k] * (total - a);
            if !(margin > 0.0) {
                return None;
            }
            c2 = c2.max(self.gammas[k] / margin);
        }
        for h in eh {
            let e = fro2(&(h * w));
            if !(e > 0.0) {
                return None;
            }
            c2 = c2.max(self.q / e);
        }
        c2.is_finite().then_some(c2)
    }
}

fn to_mat(x: &CVec, nt: usize, k: usize) -> CMat {
    CMat::from_column_slice(nt, k, &x.as_slice()[..nt * k])
}

fn scale(m: &CMat, s: f64) -> CMat {
    m * Complex64::new(s, 0.0)
}

/// Fixed-channel precoder problem in reference-power units.
pub(crate) struct PowerProblem<'a> {
    pub id: Vec<CMat>,
    pub eh: Vec<CMat>,
    pub qos: &'a Qos,
    pub nt: usize,
}

impl ConstrainedProblem for PowerProblem<'_> {
    type Domain = ComplexEuclidean;

    fn domain(&self) -> &ComplexEuclidean {
        &ComplexEuclidean
    }

    fn objective(&self, x: &CVec) -> f64 {
        x.norm_squared()
    }

    fn constraints(&self, x: &CVec) -> Vec<f64> {
        self.qos
            .constraints(&self.id, &self.eh, &to_mat(x, self.nt, self.id.len()))
    }

    fn gradient(&self, x: &CVec, weights: &[f64]) -> CVec {
        let w = to_mat(x, self.nt, self.id.len());
        let (gw, _, _) = self.qos.gradient(&self.id, &self.eh, &w, weights);
        x * Complex64::new(2.0, 0.0) + CVec::from_column_slice(gw.as_slice())
    }
}

/// Selection relaxed to softmax weights over modes for the free tiles.
///
/// The point packs `vec(W)` followed by one logit per (free tile, mode) in the
/// real part of the remaining entries. With `binarity` every free tile also
/// carries `1 − Σ_m α_m² ≤ 0`, which holds only for one-hot weights.
pub(crate) struct RelaxedProblem<'a> {
    /// Per receiver (information first), direct plus fixed-tile contributions.
    pub base: Vec<CMat>,
    /// `[free tile][mode][receiver]`.
    pub free: Vec<Vec<Vec<CMat>>>,
    pub info: usize,
    pub qos: &'a Qos,
    pub nt: usize,
    pub binarity: bool,
}

impl RelaxedProblem<'_> {
    fn modes(&self) -> usize {
        self.free.first().map_or(0, |t| t.len())
    }

    pub fn weights(&self, x: &CVec) -> Vec<Vec<f64>> {
        let off = self.nt * self.info;
        let m = self.modes();
        (0..self.free.len())
            .map(|n| {
                let z: Vec<f64> = (0..m).map(|i| x[off + n * m + i].re).collect();
                let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|v| (v - top).exp()).collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|v| v / s).collect()
            })
            .collect()
    }

    pub fn channels(&self, alpha: &[Vec<f64>]) -> Vec<CMat> {
        let mut h = self.base.clone();
        for (tile, a) in self.free.iter().zip(alpha) {
            for (mode, &am) in tile.iter().zip(a) {
                for (hr, c) in h.iter_mut().zip(mode) {
                    *hr += c * Complex64::new(am, 0.0);
                }
            }
        }
        h
    }

    pub fn len(&self) -> usize {
        self.nt * self.info + self.free.len() * self.modes()
    }
}

impl ConstrainedProblem for RelaxedProblem<'_> {
    type Domain = ComplexEuclidean;

    fn domain(&self) -> &ComplexEuclidean {
        &ComplexEuclidean
    }

    fn objective(&self, x: &CVec) -> f64 {
        x.rows(0, self.nt * self.info).norm_squared()
    }

    fn constraints(&self, x: &CVec) -> Vec<f64> {
        let alpha = self.weights(x);
        let h = self.channels(&alpha);
        let mut g = self
            .qos
            .constraints(&h[..self.info], &h[self.info..], &to_mat(x, self.nt, self.info));
        if self.binarity {
            g.extend(alpha.iter().map(|a| 1.0 - a.iter().map(|v| v * v).sum::<f64>()));
        }
        g
    }

    fn gradient(&self, x: &CVec, weights: &[f64]) -> CVec {
        let alpha = self.weights(x);
        let h = self.channels(&alpha);
        let w = to_mat(x, self.nt, self.info);
        let nq = h.len();
        let (gw, gid, geh) = self.qos.gradient(&h[..self.info], &h[self.info..], &w, &weights[..nq]);
        let gh: Vec<&CMat> = gid.iter().chain(&geh).collect();
        let mut g = CVec::zeros(x.len());
        let nw = self.nt * self.info;
        g.rows_mut(0, nw)
            .copy_from(&(x.rows(0, nw) * Complex64::new(2.0, 0.0) + CVec::from_column_slice(gw.as_slice())));
        let m = self.modes();
        for (n, tile) in self.free.iter().enumerate() {
            let mut da: Vec<f64> = tile
                .iter()
                .map(|mode| mode.iter().zip(&gh).map(|(c, g)| g.dotc(c).re).sum())
                .collect();
            if self.binarity {
                let wb = weights[nq + n];
                for (d, a) in da.iter_mut().zip(&alpha[n]) {
                    *d -= 2.0 * wb * a;
                }
            }
            let mean: f64 = da.iter().zip(&alpha[n]).map(|(d, a)| d * a).sum();
            for i in 0..m {
                g[nw + n * m + i] = Complex64::new(alpha[n][i] * (da[i] - mean), 0.0);
            }
        }
        g
    }
}

/// Cheapest feasible scaling of a zero-forcing or matched-filter precoder.
fn initial_precoder(qos: &Qos, id: &[CMat], eh: &[CMat], nt: usize) -> Option<(CMat, f64)> {
    let k = id.len();
    let mut h = CMat::zeros(k, nt);
    for (i, r) in id.iter().enumerate() {
        h.set_row(i, &r.row(0));
    }
    let mut candidates = Vec::new();
    if let Some(inv) = (&h * h.adjoint()).try_inverse() {
        candidates.push(h.adjoint() * inv);
    }
    let mut mrt = h.adjoint();
    for mut c in mrt.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= Complex64::new(n, 0.0);
        }
    }
    candidates.push(mrt);
    candidates
        .into_iter()
        .filter_map(|w| {
            qos.min_scale2(id, eh, &w).map(|c2| {
                let w = scale(&w, c2.sqrt());
                let p = fro2(&w);
                (w, p)
            })
        })
        .filter(|(_, p)| p.is_finite() && *p > 0.0)
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Precoder found for one selection, in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct SwiptPrecoder {
    pub w: CMat,
    pub power: f64,
    pub max_violation: f64,
}

/// Mode selection over precomputed tile channels; see [`solve_swipt`].
pub struct SwiptSelection<'a> {
    tc: &'a EffectiveTileChannels,
    qos: Qos,
    rx: Vec<usize>,
    info: usize,
    nt: usize,
    noise_scale: f64,
    opts: SwiptOptions,
    /// `[tile][receiver]`: largest contribution norm over modes.
    max_norms: Vec<Vec<f64>>,
}

impl<'a> SwiptSelection<'a> {
    pub fn new(
        sc: &SwiptScenario,
        tc: &'a EffectiveTileChannels,
        noise_power: f64,
        opts: &SwiptOptions,
    ) -> Result<SwiptSelection<'a>> {
        if sc.info_receivers.is_empty() {
            return Err(domain("at least one information receiver is needed"));
        }
        if sc.sinr_targets.len() != sc.info_receivers.len() {
            return Err(dimension("one SINR target per information receiver"));
        }
        if sc.sinr_targets.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(domain("SINR targets must be positive and finite"));
        }
        if !(sc.efficiency > 0.0 && sc.efficiency <= 1.0) {
            return Err(domain("harvesting efficiency must lie in (0, 1]"));
        }
        if !(sc.min_harvested > 0.0 && sc.min_harvested.is_finite()) {
            return Err(domain("minimum harvested power must be positive and finite"));
        }
        if !(noise_power > 0.0) {
            return Err(domain("noise power must be positive"));
        }
        let rx: Vec<usize> = sc.info_receivers.iter().chain(&sc.energy_receivers).copied().collect();
        for &r in &rx {
            if r >= tc.rx_count() {
                return Err(dimension(format!("receiver {r} does not exist")));
            }
            if tc.direct[r].nrows() != 1 {
                return Err(dimension(format!("receiver {r} must have a single antenna")));
            }
        }
        let nt = tc.direct[rx[0]].ncols();
        let noise_scale = 1.0 / noise_power.sqrt();
        let max_norms = tc
            .contributions
            .iter()
            .map(|tile| {
                rx.iter()
                    .map(|&r| tile.iter().map(|m| m[r].norm() * noise_scale).fold(0.0, f64::max))
                    .collect()
            })
            .collect();
        Ok(SwiptSelection {
            tc,
            qos: Qos {
                gammas: sc.sinr_targets.clone(),
                q: sc.min_harvested / (sc.efficiency * noise_power),
            },
            rx,
            info: sc.info_receivers.len(),
            nt,
            noise_scale,
            opts: *opts,
            max_norms,
        })
    }

    fn normalised(&self, channels: &[CMat]) -> Vec<CMat> {
        self.rx.iter().map(|&r| scale(&channels[r], self.noise_scale)).collect()
    }

    /// Noise-normalised channels of the scenario's receivers for a selection.
    fn channels(&self, selection: &ModeSelection) -> Result<Vec<CMat>> {
        Ok(self.normalised(&select_effective_channel(self.tc, selection)?))
    }

    /// Minimum-power precoder for fixed noise-normalised channels.
    pub(crate) fn solve_channels(&self, h: &[CMat]) -> Result<(SwiptPrecoder, bool)> {
        let (id, eh) = h.split_at(self.info);
        let Some((w0, p_ref)) = initial_precoder(&self.qos, id, eh, self.nt) else {
            let w = CMat::zeros(self.nt, self.info);
            let v = max_violation(&self.qos.constraints(id, eh, &w));
            return Ok((
                SwiptPrecoder {
                    w,
                    power: f64::INFINITY,
                    max_violation: v,
                },
                false,
            ));
        };
        let s = p_ref.sqrt();
        let problem = PowerProblem {
            id: id.iter().map(|m| scale(m, s)).collect(),
            eh: eh.iter().map(|m| scale(m, s)).collect(),
            qos: &self.qos,
            nt: self.nt,
        };
        let u0 = CVec::from_column_slice(scale(&w0, 1.0 / s).as_slice());
        let r = penalty_solve(&problem, u0, &self.opts.penalty)?;
        let u = to_mat(&r.report.point, self.nt, self.info);
        let mut best = w0;
        if let Some(c2) = self.qos.min_scale2(&problem.id, &problem.eh, &u) {
            if c2 * fro2(&u) < 1.0 {
                best = scale(&u, c2.sqrt() * s);
            }
        }
        let v = max_violation(&self.qos.constraints(id, eh, &best));
        Ok((
            SwiptPrecoder {
                power: fro2(&best),
                w: best,
                max_violation: v,
            },
            true,
        ))
    }

    /// Lower bound on the power of any completion of `prefix`.
    pub fn bound(&self, prefix: &[usize]) -> f64 {
        match self.opts.bound {
            BoundKind::ChannelGain => self.gain_bound(prefix),
            BoundKind::Relaxation => self
                .relaxation_bound(prefix)
                .unwrap_or_else(|_| self.gain_bound(prefix)),
        }
    }

    fn fixed_part(&self, prefix: &[usize]) -> Vec<CMat> {
        let mut base: Vec<CMat> = self
            .rx
            .iter()
            .map(|&r| scale(&self.tc.direct[r], self.noise_scale))
            .collect();
        for (n, &m) in prefix.iter().enumerate() {
            for (b, &r) in base.iter_mut().zip(&self.rx) {
                *b += scale(&self.tc.contributions[n][m][r], self.noise_scale);
            }
        }
        base
    }

    fn gain_bound(&self, prefix: &[usize]) -> f64 {
        let base = self.fixed_part(prefix);
        let ub: Vec<f64> = (0..self.rx.len())
            .map(|i| base[i].norm() + self.max_norms[prefix.len()..].iter().map(|t| t[i]).sum::<f64>())
            .collect();
        let info: f64 = self.qos.gammas.iter().zip(&ub).map(|(g, u)| g / (u * u)).sum();
        let energy = ub[self.info..].iter().map(|u| self.qos.q / (u * u)).fold(0.0, f64::max);
        info.max(energy)
    }

    fn relaxed(&self, prefix: &[usize], binarity: bool) -> RelaxedProblem<'_> {
        RelaxedProblem {
            base: self.fixed_part(prefix),
            free: self.tc.contributions[prefix.len()..]
                .iter()
                .map(|tile| {
                    tile.iter()
                        .map(|mode| self.rx.iter().map(|&r| scale(&mode[r], self.noise_scale)).collect())
                        .collect()
                })
                .collect(),
            info: self.info,
            qos: &self.qos,
            nt: self.nt,
            binarity,
        }
    }

    /// Solves the relaxed problem from the given logits; returns the final
    /// point and the power after minimal rescaling.
    fn solve_relaxed(&self, p: &RelaxedProblem<'_>, logits: &[f64]) -> Result<(CVec, f64)> {
        let mut x = CVec::zeros(p.len());
        let nw = self.nt * self.info;
        for (i, &z) in logits.iter().enumerate() {
            x[nw + i] = Complex64::new(z, 0.0);
        }
        let h = p.channels(&p.weights(&x));
        let (id, eh) = h.split_at(self.info);
        let Some((w0, p_ref)) = initial_precoder(&self.qos, id, eh, self.nt) else {
            return Ok((x, f64::INFINITY));
        };
        let s = p_ref.sqrt();
        let scaled = RelaxedProblem {
            base: p.base.iter().map(|m| scale(m, s)).collect(),
            free: p
                .free
                .iter()
                .map(|t| t.iter().map(|m| m.iter().map(|c| scale(c, s)).collect()).collect())
                .collect(),
            info: p.info,
            qos: p.qos,
            nt: p.nt,
            binarity: p.binarity,
        };
        x.rows_mut(0, nw)
            .copy_from(&CVec::from_column_slice(scale(&w0, 1.0 / s).as_slice()));
        let r = penalty_solve(&scaled, x, &self.opts.penalty)?;
        let hs = scaled.channels(&scaled.weights(&r.report.point));
        let u = to_mat(&r.report.point, self.nt, self.info);
        let power = match self.qos.min_scale2(&hs[..self.info], &hs[self.info..], &u) {
            Some(c2) => (c2 * fro2(&u)).min(1.0) * p_ref,
            None => p_ref,
        };
        Ok((r.report.point, power))
    }

    fn relaxation_bound(&self, prefix: &[usize]) -> Result<f64> {
        if prefix.len() == self.tile_count() {
            return Ok(self.solve_channels(&self.fixed_part(prefix))?.0.power);
        }
        let p = self.relaxed(prefix, false);
        let logits = vec![0.0; p.free.len() * p.modes()];
        Ok(self.solve_relaxed(&p, &logits)?.1)
    }

    /// Relaxed selection with a binarity penalty, rounded to the largest weight per tile.
    pub fn relax_and_round(&self, seed: u64) -> Result<ModeSelection> {
        let p = self.relaxed(&[], true);
        let mut rng = stream(derive(seed, purpose::SELECTION));
        let logits: Vec<f64> = (0..p.free.len() * p.modes())
            .map(|_| 0.1 * (rng.random::<f64>() - 0.5))
            .collect();
        let (x, _) = self.solve_relaxed(&p, &logits)?;
        Ok(ModeSelection(
            p.weights(&x)
                .iter()
                .map(|a| a.iter().enumerate().fold(0, |b, (i, v)| if *v > a[b] { i } else { b }))
                .collect(),
        ))
    }

    /// Precoder with every surface contribution removed.
    pub fn solve_direct(&self) -> Result<InnerOutcome<SwiptPrecoder>> {
        let h = self.normalised(&self.tc.direct);
        let (sol, ok) = self.solve_channels(&h)?;
        Ok(self.outcome(sol, ok))
    }

    fn outcome(&self, sol: SwiptPrecoder, ok: bool) -> InnerOutcome<SwiptPrecoder> {
        InnerOutcome {
            objective: sol.power,
            feasible: ok && sol.max_violation <= 1e-6,
            solution: sol,
        }
    }
}

impl SelectionProblem for SwiptSelection<'_> {
    type Solution = SwiptPrecoder;

    fn tile_count(&self) -> usize {
        self.tc.tile_count()
    }

    fn mode_count(&self) -> usize {
        self.tc.mode_count()
    }

    fn inner_solve(&self, selection: &ModeSelection) -> Result<InnerOutcome<SwiptPrecoder>> {
        let (sol, ok) = self.solve_channels(&self.channels(selection)?)?;
        Ok(self.outcome(sol, ok))
    }
}

/// Minimises the transmit power over the precoder and the mode selection.
///
/// `Exhaustive` solves every selection; `Bnb` searches depth-first with the
/// configured bound; `Penalty` rounds a relaxed selection; `Random` draws one
/// selection from the seed's selection stream; `None` ignores the surface.
/// The objective is the transmit power in watts (`+∞` when infeasible).
pub fn solve_swipt(
    sc: &SwiptScenario,
    tc: &EffectiveTileChannels,
    noise_power: f64,
    method: SwiptMethod,
    seed: u64,
    opts: &SwiptOptions,
) -> Result<BeamformingSolution> {
    let problem = SwiptSelection::new(sc, tc, noise_power, opts)?;
    let (n, m) = (problem.tile_count(), problem.mode_count());
    let (selection, outcome, evaluations, trace) = match method {
        SwiptMethod::None => {
            let o = problem.solve_direct()?;
            (None, o, 1, vec![])
        }
        SwiptMethod::Random => {
            let mut rng = stream(derive(seed, purpose::SELECTION));
            let sel = ModeSelection((0..n).map(|_| rng.random_range(0..m)).collect());
            let o = problem.inner_solve(&sel)?;
            (Some(sel), o, 1, vec![])
        }
        SwiptMethod::Penalty => {
            let sel = problem.relax_and_round(seed)?;
            let o = problem.inner_solve(&sel)?;
            (Some(sel), o, 1, vec![])
        }
        SwiptMethod::Exhaustive | SwiptMethod::Bnb => {
            let r = if method == SwiptMethod::Exhaustive {
                exhaustive_select(
                    &problem,
                    &SelectionOptions {
                        cap: opts.cap,
                        execution: opts.execution,
                    },
                )?
            } else {
                branch_and_bound(&problem, &|p: &[usize]| problem.bound(p), &BnbOptions { cap: opts.cap })?
            };
            let o = r
                .outcome
                .ok_or_else(|| Error::Contract("selection search returned no outcome".into()))?;
            (Some(r.selection), o, r.evaluations, r.trace)
        }
    };
    let feasible = outcome.feasible;
    Ok(BeamformingSolution {
        v: CMat::zeros(outcome.solution.w.nrows(), 0),
        w: outcome.solution.w,
        irs: selection.map_or(IrsConfiguration::None, IrsConfiguration::Tiles),
        objective: if feasible { outcome.objective } else { f64::INFINITY },
        feasible,
        max_violation: outcome.solution.max_violation,
        iterations: evaluations,
        trace,
        worst_case_leakage: None,
    })
}
