//! Secure multi-user downlink with artificial noise.
//!
//! The sum rate of the legitimate users is maximised subject to a transmit
//! power budget and a cap on every user's leakage SINR at every eavesdropper,
//! where the eavesdropper channels are only known up to a Frobenius-norm error.
//! The error ball is represented by sampled boundary points. Precoder, noise
//! factor and surface configuration are updated alternately.
//!
//! Internally all channels are scaled by `√P_max/σ`, so the noise power is one
//! and the power budget is one; uncertainty radii are given in these units.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{leakage_gradient, leakage_terms, link_metrics, sum_rate_gradient};
use super::robust::{sample_boundary_errors, worst_case_leakage, WorstCaseOptions};
use super::{BeamformingSolution, IrsConfiguration};
use crate::channel::ChannelSet;
use crate::error::{dimension, domain, Result};
use crate::irs_models::{reactance_for_phase, reactance_gradient, reactance_to_scattering, Connectivity, InwConfig};
use crate::linalg::{cis, wrap_phase, CMat, CVec};
use crate::optim::{
    alternating_optimize, ascend, max_violation, penalty_solve, AoOptions, AscentOptions, Block, ComplexCircle,
    ComplexEuclidean, ConstrainedProblem, PenaltySchedule, SmoothProblem, SymmetricMatrices,
};
use crate::rng::{derive, purpose, stream};

/// Bounded error on the eavesdropper effective channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsiError {
    /// Frobenius radius in normalised channel units (multiples of `σ/√P_max`).
    pub radius: f64,
    /// Boundary samples enforced as constraints.
    pub samples: usize,
}

impl Default for CsiError {
    fn default() -> Self {
        CsiError {
            radius: 0.0,
            samples: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecureScenario {
    /// Receiver indices of the single-antenna legitimate users.
    pub users: Vec<usize>,
    /// Receiver indices of the eavesdroppers.
    pub eavesdroppers: Vec<usize>,
    /// Watts.
    pub power_budget: f64,
    /// Linear leakage SINR cap; `f64::INFINITY` disables the constraints.
    pub leakage_cap: f64,
    pub csi_error: CsiError,
}

/// Wiring of an impedance-network surface, applied per physical surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wiring {
    Single,
    Full,
    Partial { group_size: usize },
}

impl Wiring {
    /// Connectivity of the stacked surface; elements of different surfaces are never connected.
    pub fn connectivity(&self, element_counts: &[usize]) -> Connectivity {
        let counts: Vec<usize> = element_counts.iter().copied().filter(|&c| c > 0).collect();
        match self {
            Wiring::Single => Connectivity::Single,
            Wiring::Full if counts.len() == 1 => Connectivity::Full,
            Wiring::Full => Connectivity::Partial { groups: counts },
            Wiring::Partial { group_size } => {
                let groups = counts
                    .iter()
                    .flat_map(|&c| match Connectivity::partial_uniform(c, *group_size) {
                        Connectivity::Partial { groups } => groups,
                        _ => unreachable!(),
                    })
                    .collect();
                Connectivity::Partial { groups }
            }
        }
    }
}

/// How the surface is configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrsModel {
    /// Independent unit-modulus phase shifts, optimised.
    Ids,
    /// Lossless reactance network, optimised from the converged phase-shift solution.
    Inw(Wiring),
    /// I.i.d. uniform phases, not optimised.
    Random,
    /// No reflection.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecureOptions {
    pub ao: AoOptions,
    pub penalty: PenaltySchedule,
    pub irs_ascent: AscentOptions,
    /// Penalty weight on leakage violations inside the surface update.
    pub irs_penalty: f64,
    /// Share of the power budget given to artificial noise at initialisation.
    pub an_fraction: f64,
    pub reference_impedance: f64,
    pub verification: WorstCaseOptions,
}

impl Default for SecureOptions {
    fn default() -> Self {
        let inner = AscentOptions {
            max_iter: 200,
            f_tol: 1e-10,
            tol: 1e-7,
            ..AscentOptions::default()
        };
        SecureOptions {
            ao: AoOptions {
                max_sweeps: 30,
                tol: 1e-5,
                slack: 1e-9,
            },
            penalty: PenaltySchedule {
                inner,
                stop_when_feasible: true,
                ..PenaltySchedule::default()
            },
            irs_ascent: AscentOptions { max_iter: 100, ..inner },
            irs_penalty: 10.0,
            an_fraction: 0.1,
            reference_impedance: crate::irs_models::DEFAULT_REFERENCE_IMPEDANCE,
            verification: WorstCaseOptions::default(),
        }
    }
}

/// Normalised channels of the receivers that matter, surfaces stacked.
pub(crate) struct Links {
    /// Users first, then eavesdroppers.
    pub direct: Vec<CMat>,
    pub irs_to_rx: Vec<CMat>,
    pub tx_to_irs: CMat,
    pub users: usize,
    pub nt: usize,
}

impl Links {
    pub fn new(cs: &ChannelSet, sc: &SecureScenario) -> Result<Links> {
        cs.validate()?;
        let nt = cs.tx_antennas();
        let scale = (sc.power_budget / cs.noise_power).sqrt();
        let stacked = if cs.irs_count() > 1 { cs.stacked() } else { cs.clone() };
        let rx: Vec<usize> = sc.users.iter().chain(&sc.eavesdroppers).copied().collect();
        if let Some(&bad) = rx.iter().find(|&&r| r >= cs.rx_count()) {
            return Err(dimension(format!("receiver {bad} does not exist")));
        }
        for &u in &sc.users {
            if cs.direct[u].nrows() != 1 {
                return Err(dimension(format!("user {u} must have a single antenna")));
            }
        }
        let s = Complex64::new(scale, 0.0);
        let (tx_to_irs, irs_to_rx) = if stacked.irs_count() == 0 {
            (
                CMat::zeros(0, nt),
                rx.iter().map(|&r| CMat::zeros(cs.direct[r].nrows(), 0)).collect(),
            )
        } else {
            (
                stacked.tx_to_irs[0].clone(),
                rx.iter().map(|&r| &stacked.irs_to_rx[0][r] * s).collect(),
            )
        };
        Ok(Links {
            direct: rx.iter().map(|&r| &cs.direct[r] * s).collect(),
            irs_to_rx,
            tx_to_irs,
            users: sc.users.len(),
            nt,
        })
    }

    pub fn elements(&self) -> usize {
        self.tx_to_irs.nrows()
    }

    pub fn channels(&self, theta: &CMat) -> Vec<CMat> {
        self.direct
            .iter()
            .zip(&self.irs_to_rx)
            .map(|(d, b)| {
                if b.ncols() == 0 {
                    d.clone()
                } else {
                    d + b * theta * &self.tx_to_irs
                }
            })
            .collect()
    }

    /// `Σ_i B_iᴴ G_i Aᴴ`: pulls per-receiver channel gradients back to `Θ`.
    pub fn pull_back(&self, grads: &[CMat]) -> CMat {
        let l = self.elements();
        let mut m = CMat::zeros(l, self.nt);
        for (b, g) in self.irs_to_rx.iter().zip(grads) {
            m += b.adjoint() * g;
        }
        m * self.tx_to_irs.adjoint()
    }
}

/// Packs `[vec(W); vec(V)]`.
pub(crate) fn pack(w: &CMat, v: &CMat) -> CVec {
    CVec::from_iterator(w.len() + v.len(), w.iter().chain(v.iter()).copied())
}

pub(crate) fn unpack(x: &CVec, nt: usize, k: usize) -> (CMat, CMat) {
    let w = CMat::from_column_slice(nt, k, &x.as_slice()[..nt * k]);
    let v = CMat::from_column_slice(nt, nt, &x.as_slice()[nt * k..]);
    (w, v)
}

/// Precoder/noise-factor subproblem for fixed channels:
/// `minimise −R(W, V)` s.t. `‖W‖² + ‖V‖² ≤ 1`, `L_{e,k}/τ ≤ 1`.
pub(crate) struct PrecoderProblem {
    pub users: Vec<CMat>,
    /// Eavesdropper channels, one entry per (eavesdropper, error sample).
    pub eavs: Vec<CMat>,
    pub cap: f64,
    pub nt: usize,
}

impl PrecoderProblem {
    fn k(&self) -> usize {
        self.users.len()
    }

    fn leak_active(&self) -> bool {
        self.cap.is_finite() && !self.eavs.is_empty() && self.k() > 0
    }

    pub fn leakage_max(&self, w: &CMat, v: &CMat) -> Result<f64> {
        let mut m: f64 = 0.0;
        for e in &self.eavs {
            for t in leakage_terms(e, w, v, 1.0)? {
                m = m.max(t.value);
            }
        }
        Ok(m)
    }

    pub fn sum_rate(&self, x: &CVec) -> f64 {
        let (w, v) = unpack(x, self.nt, self.k());
        if self.k() == 0 {
            return 0.0;
        }
        link_metrics(&self.users, &w, &v, 1.0).map_or(f64::NAN, |m| m.sum_rate)
    }

    /// Largest scaling `c·x` that meets every constraint (all constraints are
    /// monotone in `c`, and the rate increases with `c`).
    pub fn restore(&self, x: &CVec) -> Result<CVec> {
        let p = x.norm_squared();
        if p == 0.0 {
            return Ok(x.clone());
        }
        let c_pow = 1.0 / p.sqrt();
        if !self.leak_active() {
            return Ok(x * Complex64::new(c_pow, 0.0));
        }
        let k = self.k();
        let feasible = |c: f64| -> Result<bool> {
            let (w, v) = unpack(&(x * Complex64::new(c, 0.0)), self.nt, k);
            Ok(self.leakage_max(&w, &v)? <= self.cap)
        };
        if feasible(c_pow)? {
            return Ok(x * Complex64::new(c_pow, 0.0));
        }
        let (mut lo, mut hi) = (0.0, c_pow);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(x * Complex64::new(lo, 0.0))
    }
}

impl ConstrainedProblem for PrecoderProblem {
    type Domain = ComplexEuclidean;

    fn domain(&self) -> &ComplexEuclidean {
        &ComplexEuclidean
    }

    fn objective(&self, x: &CVec) -> f64 {
        -self.sum_rate(x)
    }

    fn constraints(&self, x: &CVec) -> Vec<f64> {
        let mut g = vec![x.norm_squared() - 1.0];
        if self.leak_active() {
            let (w, v) = unpack(x, self.nt, self.k());
            for e in &self.eavs {
                match leakage_terms(e, &w, &v, 1.0) {
                    Ok(ts) => g.extend(ts.iter().map(|t| t.value / self.cap - 1.0)),
                    Err(_) => g.extend(std::iter::repeat_n(f64::NAN, self.k())),
                }
            }
        }
        g
    }

    fn gradient(&self, x: &CVec, weights: &[f64]) -> CVec {
        let k = self.k();
        let (w, v) = unpack(x, self.nt, k);
        let mut g = if k > 0 {
            let sr = sum_rate_gradient(&self.users, &w, &v, 1.0);
            -pack(&sr.w, &sr.v)
        } else {
            CVec::zeros(x.len())
        };
        g += x * Complex64::new(2.0 * weights[0], 0.0);
        if self.leak_active() {
            for (i, e) in self.eavs.iter().enumerate() {
                let wts: Vec<f64> = weights[1 + i * k..1 + (i + 1) * k]
                    .iter()
                    .map(|w| w / self.cap)
                    .collect();
                if wts.iter().all(|&w| w == 0.0) {
                    continue;
                }
                if let Ok(ts) = leakage_terms(e, &w, &v, 1.0) {
                    let (gw, gv, _) = leakage_gradient(e, &w, &v, &ts, &wts);
                    g += pack(&gw, &gv);
                }
            }
        }
        g
    }
}

/// Surface subproblem for a fixed precoder:
/// `R(Θ) − μ·Σ max(0, L_{e,k,s}(Θ)/τ − 1)²`.
pub(crate) struct SurfaceObjective<'a> {
    pub links: &'a Links,
    /// Per eavesdropper (in order), the error samples including the zero error.
    pub errors: &'a [Vec<CMat>],
    pub w: CMat,
    pub v: CMat,
    pub cap: f64,
    pub mu: f64,
}

impl SurfaceObjective<'_> {
    fn leak_active(&self) -> bool {
        self.cap.is_finite() && !self.errors.is_empty() && self.w.ncols() > 0
    }

    pub fn value(&self, theta: &CMat) -> f64 {
        let h = self.links.channels(theta);
        let k = self.links.users;
        let mut f = if k > 0 {
            match link_metrics(&h[..k], &self.w, &self.v, 1.0) {
                Ok(m) => m.sum_rate,
                Err(_) => return f64::NAN,
            }
        } else {
            0.0
        };
        if self.leak_active() {
            for (e, errs) in h[k..].iter().zip(self.errors) {
                for d in errs {
                    match leakage_terms(&(e + d), &self.w, &self.v, 1.0) {
                        Ok(ts) => {
                            f -= self.mu
                                * ts.iter()
                                    .map(|t| (t.value / self.cap - 1.0).max(0.0).powi(2))
                                    .sum::<f64>()
                        }
                        Err(_) => return f64::NAN,
                    }
                }
            }
        }
        f
    }

    /// Euclidean gradient with respect to `Θ`.
    pub fn gradient(&self, theta: &CMat) -> CMat {
        let h = self.links.channels(theta);
        let k = self.links.users;
        let mut grads: Vec<CMat> = Vec::with_capacity(h.len());
        if k > 0 {
            grads.extend(sum_rate_gradient(&h[..k], &self.w, &self.v, 1.0).h);
        }
        for (i, e) in h[k..].iter().enumerate() {
            let mut g = CMat::zeros(e.nrows(), e.ncols());
            if self.leak_active() {
                for d in &self.errors[i] {
                    let pert = e + d;
                    let Ok(ts) = leakage_terms(&pert, &self.w, &self.v, 1.0) else {
                        continue;
                    };
                    let wts: Vec<f64> = ts
                        .iter()
                        .map(|t| -2.0 * self.mu * (t.value / self.cap - 1.0).max(0.0) / self.cap)
                        .collect();
                    if wts.iter().any(|&w| w != 0.0) {
                        g += leakage_gradient(&pert, &self.w, &self.v, &ts, &wts).2;
                    }
                }
            }
            grads.push(g);
        }
        self.links.pull_back(&grads)
    }
}

fn diag(x: &CVec) -> CMat {
    CMat::from_diagonal(x)
}

#[derive(Debug, Clone)]
enum Surface {
    Fixed(CMat),
    Phases(CVec),
    Reactance(DMatrix<f64>),
}

#[derive(Debug, Clone)]
struct State {
    x: CVec,
    surface: Surface,
}

struct Solver<'a> {
    links: &'a Links,
    errors: Vec<Vec<CMat>>,
    cap: f64,
    opts: &'a SecureOptions,
    connectivity: Connectivity,
}

impl Solver<'_> {
    fn theta(&self, s: &Surface) -> Result<CMat> {
        match s {
            Surface::Fixed(t) => Ok(t.clone()),
            Surface::Phases(x) => Ok(diag(x)),
            Surface::Reactance(x) => Ok(reactance_to_scattering(&self.inw(x)?)?.into_inner()),
        }
    }

    fn inw(&self, x: &DMatrix<f64>) -> Result<InwConfig> {
        InwConfig::new(self.connectivity.clone(), x.clone(), self.opts.reference_impedance)
    }

    fn precoder_problem(&self, theta: &CMat) -> PrecoderProblem {
        let h = self.links.channels(theta);
        let k = self.links.users;
        PrecoderProblem {
            users: h[..k].to_vec(),
            eavs: h[k..]
                .iter()
                .zip(&self.errors)
                .flat_map(|(e, errs)| errs.iter().map(move |d| e + d))
                .collect(),
            cap: self.cap,
            nt: self.links.nt,
        }
    }

    fn objective(&self, s: &State) -> f64 {
        match self.theta(&s.surface) {
            Ok(t) => self.precoder_problem(&t).sum_rate(&s.x),
            Err(_) => f64::NAN,
        }
    }

    fn update_precoder(&self, s: &State) -> Result<State> {
        let theta = self.theta(&s.surface)?;
        let p = self.precoder_problem(&theta);
        let r = penalty_solve(&p, s.x.clone(), &self.opts.penalty)?;
        let cand = p.restore(&r.report.point)?;
        let current = p.restore(&s.x)?;
        let x = if p.sum_rate(&cand) >= p.sum_rate(&current) {
            cand
        } else {
            current
        };
        Ok(State {
            x,
            surface: s.surface.clone(),
        })
    }

    fn surface_objective(&self, s: &State) -> SurfaceObjective<'_> {
        let (w, v) = unpack(&s.x, self.links.nt, self.links.users);
        SurfaceObjective {
            links: self.links,
            errors: &self.errors,
            w,
            v,
            cap: self.cap,
            mu: self.opts.irs_penalty,
        }
    }

    fn update_surface(&self, s: &State) -> Result<State> {
        let obj = self.surface_objective(s);
        let surface = match &s.surface {
            Surface::Fixed(_) => return Ok(s.clone()),
            Surface::Phases(x) => {
                let prob = SmoothProblem::new(
                    ComplexCircle,
                    |x: &CVec| obj.value(&diag(x)),
                    |x: &CVec| obj.gradient(&diag(x)).diagonal(),
                );
                Surface::Phases(ascend(&prob, x.clone(), &self.opts.irs_ascent)?.point)
            }
            Surface::Reactance(x) => {
                let mask = self.connectivity.mask(x.nrows())?;
                let prob = SmoothProblem::new(
                    SymmetricMatrices::new(mask),
                    |x: &DMatrix<f64>| match self.theta(&Surface::Reactance(x.clone())) {
                        Ok(t) => obj.value(&t),
                        Err(_) => f64::NAN,
                    },
                    |x: &DMatrix<f64>| {
                        let cfg = self.inw(x);
                        let t = cfg.as_ref().ok().and_then(|c| reactance_to_scattering(c).ok());
                        match (cfg, t) {
                            (Ok(cfg), Some(t)) => reactance_gradient(&cfg, &obj.gradient(t.matrix()))
                                .unwrap_or_else(|_| DMatrix::from_element(x.nrows(), x.ncols(), f64::NAN)),
                            _ => DMatrix::from_element(x.nrows(), x.ncols(), f64::NAN),
                        }
                    },
                );
                Surface::Reactance(ascend(&prob, x.clone(), &self.opts.irs_ascent)?.point)
            }
        };
        let theta = self.theta(&surface)?;
        let p = self.precoder_problem(&theta);
        let cand = State {
            x: p.restore(&s.x)?,
            surface,
        };
        Ok(if self.objective(&cand) >= self.objective(s) {
            cand
        } else {
            s.clone()
        })
    }

    fn run(&self, init: State) -> Result<(State, f64, usize, Vec<f64>)> {
        if matches!(init.surface, Surface::Fixed(_)) || self.links.elements() == 0 {
            let s = self.update_precoder(&init)?;
            let f = self.objective(&s);
            return Ok((s, f, 1, vec![self.objective(&init), f]));
        }
        let mut blocks = vec![
            Block::new("precoder", |s: &State| self.update_precoder(s)),
            Block::new("surface", |s: &State| self.update_surface(s)),
        ];
        let r = alternating_optimize(init, &mut blocks, |s| self.objective(s), &self.opts.ao)?;
        Ok((r.state, r.objective, r.sweeps, r.trace))
    }
}

fn mrt_init(links: &Links, theta: &CMat, an_fraction: f64) -> CVec {
    let (nt, k) = (links.nt, links.users);
    let h = links.channels(theta);
    let mut w = CMat::zeros(nt, k);
    let per = ((1.0 - an_fraction) / k.max(1) as f64).sqrt();
    for (j, hk) in h[..k].iter().enumerate() {
        let n = hk.norm();
        if n > 0.0 {
            w.set_column(j, &(hk.adjoint().column(0) * Complex64::new(per / n, 0.0)));
        }
    }
    let v = CMat::identity(nt, nt) * Complex64::new((an_fraction / nt as f64).sqrt(), 0.0);
    pack(&w, &v)
}

/// Maximises the users' sum rate under the power budget and the (sampled)
/// worst-case leakage caps.
///
/// `Ids` alternates between the precoder/noise factor (quadratic penalty) and
/// the phases (ascent on the complex circle), starting from the same random
/// phases `Random` keeps fixed. `Inw` first solves `Ids`, converts the phases
/// to a diagonal reactance and continues over the wired reactance matrix, so
/// its rate is never below the `Ids` rate. After every update the precoder is
/// rescaled to the largest scaling meeting all enforced constraints.
pub fn solve_secure(
    sc: &SecureScenario,
    cs: &ChannelSet,
    model: IrsModel,
    seed: u64,
    opts: &SecureOptions,
) -> Result<BeamformingSolution> {
    if !(sc.power_budget > 0.0) {
        return Err(domain("power budget must be positive"));
    }
    if !(sc.leakage_cap > 0.0) {
        return Err(domain("leakage cap must be positive"));
    }
    if !(sc.csi_error.radius >= 0.0) {
        return Err(domain("uncertainty radius must be non-negative"));
    }
    let links = Links::new(cs, sc)?;
    let l = links.elements();
    let eav_rows: Vec<usize> = links.direct[links.users..].iter().map(|e| e.nrows()).collect();
    let mut sample_rng = stream(derive(derive(seed, purpose::CSI_SAMPLES), 0));
    let errors: Vec<Vec<CMat>> = eav_rows
        .iter()
        .map(|&nr| {
            let mut errs = vec![CMat::zeros(nr, links.nt)];
            if sc.csi_error.radius > 0.0 {
                errs.extend(sample_boundary_errors(
                    nr,
                    links.nt,
                    sc.csi_error.radius,
                    sc.csi_error.samples,
                    &mut sample_rng,
                ));
            }
            errs
        })
        .collect();
    let counts: Vec<usize> = if cs.irs_count() == 0 {
        vec![]
    } else {
        cs.element_counts()
    };
    let connectivity = match model {
        IrsModel::Inw(wiring) => wiring.connectivity(&counts),
        _ => Connectivity::Single,
    };
    let solver = Solver {
        links: &links,
        errors,
        cap: sc.leakage_cap,
        opts,
        connectivity,
    };

    let mut init_rng = stream(derive(seed, purpose::INIT));
    let random_phases = CVec::from_fn(l, |_, _| cis(init_rng.random::<f64>() * std::f64::consts::TAU));
    let initial_surface = match model {
        IrsModel::None => Surface::Fixed(CMat::zeros(l, l)),
        IrsModel::Random => Surface::Fixed(diag(&random_phases)),
        IrsModel::Ids | IrsModel::Inw(_) => Surface::Phases(random_phases.clone()),
    };
    let theta0 = solver.theta(&initial_surface)?;
    let x0 = solver
        .precoder_problem(&theta0)
        .restore(&mrt_init(&links, &theta0, opts.an_fraction))?;
    let (mut state, mut objective, mut sweeps, mut trace) = solver.run(State {
        x: x0,
        surface: initial_surface,
    })?;

    if let (IrsModel::Inw(_), Surface::Phases(x)) = (model, &state.surface) {
        let reactance = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            l,
            x.iter().map(|z| reactance_for_phase(z.arg(), opts.reference_impedance)),
        ));
        let ids = (state.clone(), objective);
        let (s, f, sw, tr) = solver.run(State {
            x: state.x.clone(),
            surface: Surface::Reactance(reactance.clone()),
        })?;
        sweeps += sw;
        trace.extend(tr);
        if f >= ids.1 {
            state = s;
            objective = f;
        } else {
            state = State {
                x: ids.0.x,
                surface: Surface::Reactance(reactance),
            };
            objective = ids.1;
        }
    }

    let theta = solver.theta(&state.surface)?;
    let p = solver.precoder_problem(&theta);
    let violation = max_violation(&p.constraints(&state.x));
    let (wn, vn) = unpack(&state.x, links.nt, links.users);
    let worst = verified_leakage(&links, &theta, &wn, &vn, sc.csi_error.radius, seed, &opts.verification)?;
    let scale = Complex64::new(sc.power_budget.sqrt(), 0.0);
    let irs = match (&state.surface, model) {
        (_, IrsModel::None) => IrsConfiguration::None,
        (Surface::Fixed(t), _) => IrsConfiguration::Phases(t.diagonal().iter().map(|z| wrap_phase(z.arg())).collect()),
        (Surface::Phases(x), _) => IrsConfiguration::Phases(x.iter().map(|z| wrap_phase(z.arg())).collect()),
        (Surface::Reactance(x), _) => IrsConfiguration::Reactance(solver.inw(x)?),
    };
    Ok(BeamformingSolution {
        w: wn * scale,
        v: vn * scale,
        irs,
        objective,
        feasible: violation <= FEASIBILITY_TOL,
        max_violation: violation,
        iterations: sweeps,
        trace,
        worst_case_leakage: worst,
    })
}

/// Largest enforced-constraint violation still reported as feasible.
const FEASIBILITY_TOL: f64 = 1e-6;

fn verified_leakage(
    links: &Links,
    theta: &CMat,
    w: &CMat,
    v: &CMat,
    radius: f64,
    seed: u64,
    opts: &WorstCaseOptions,
) -> Result<Option<f64>> {
    if links.direct.len() == links.users || links.users == 0 {
        return Ok(None);
    }
    let eavs = &links.channels(theta)[links.users..];
    let mut rng = stream(derive(derive(seed, purpose::CSI_SAMPLES), 1));
    worst_case_leakage(eavs, radius, w, v, 1.0, opts, &mut rng).map(Some)
}

/// Worst-case leakage SINR of a secure solution when the eavesdropper
/// channels are off by up to `radius` (normalised units), searched with the
/// same verification stream `solve_secure` uses for `seed`.
pub fn verify_leakage(
    sc: &SecureScenario,
    cs: &ChannelSet,
    solution: &BeamformingSolution,
    radius: f64,
    seed: u64,
    opts: &WorstCaseOptions,
) -> Result<Option<f64>> {
    if !(radius >= 0.0) {
        return Err(domain("uncertainty radius must be non-negative"));
    }
    let links = Links::new(cs, sc)?;
    let l = links.elements();
    let theta = match &solution.irs {
        IrsConfiguration::None => CMat::zeros(l, l),
        IrsConfiguration::Phases(p) => CMat::from_diagonal(&CVec::from_iterator(p.len(), p.iter().map(|&t| cis(t)))),
        IrsConfiguration::Reactance(cfg) => reactance_to_scattering(cfg)?.into_inner(),
        IrsConfiguration::Tiles(_) => {
            return Err(crate::error::Error::Contract(
                "tile configurations are not used by the secure scenario".into(),
            ))
        }
    };
    if theta.nrows() != l {
        return Err(dimension("surface configuration does not match the channel set"));
    }
    let s = Complex64::new(1.0 / sc.power_budget.sqrt(), 0.0);
    verified_leakage(
        &links,
        &theta,
        &(&solution.w * s),
        &(&solution.v * s),
        radius,
        seed,
        opts,
    )
}
