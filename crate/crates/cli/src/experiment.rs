//! Turning a resolved specification and a trial seed into channels, a
//! scenario solve and a result row.

use std::f64::consts::TAU;
use std::time::Instant;

use irs_core::channel::{
    draw_channels, ArraySite, ChannelSet, Direction, FadingModel, FadingSpec, Geometry, Layout, LinkFading, PathLoss,
    Receiver,
};
use irs_core::codebook::{
    generate_codebook, nested_grid, partition_tiles, precompute_tile_channels, EffectiveTileChannels,
};
use irs_core::irs_models::{Eevm, ImpairmentSpec, PhaseError};
use irs_core::optim::{AoOptions, DEFAULT_ENUMERATION_CAP};
use irs_core::parallel::{map_range, Execution};
use irs_core::rng::{derive, purpose, stream, substream_seed};
use irs_core::scenarios::{
    solve_secure, solve_single_link, BoundKind, CsiError, IrsModel, SecureOptions, SecureScenario, SingleLinkOptions,
    SwiptMethod, SwiptOptions, SwiptScenario, Wiring,
};
use rand::Rng;

use crate::config::{
    db_to_linear, dbm_to_watts, BoundChoice, ConnectivityKind, ExperimentSpec, FadingKind, LinkSpec, MethodKind,
    ModelKind, PhaseErrorSpec, Region, Resolved, Role, ScenarioKind,
};
use crate::error::CliError;
use crate::table::{ResultRow, ResultTable};

/// One random drop: receiver positions and channel realisations.
#[derive(Debug, Clone)]
pub struct Instance {
    pub geometry: Geometry,
    pub channels: ChannelSet,
}

fn region_point<R: Rng + ?Sized>(region: &Region, rng: &mut R) -> [f64; 3] {
    match *region {
        Region::Point { position } => position,
        Region::Disc { center, radius, height } => {
            let r = radius * rng.random::<f64>().sqrt();
            let a = rng.random::<f64>() * TAU;
            [center[0] + r * a.cos(), center[1] + r * a.sin(), height]
        }
        Region::Sector {
            origin,
            height,
            min_distance,
            max_distance,
            min_angle_deg,
            max_angle_deg,
        } => {
            let r = min_distance + (max_distance - min_distance) * rng.random::<f64>();
            let a = (min_angle_deg + (max_angle_deg - min_angle_deg) * rng.random::<f64>()).to_radians();
            [origin[0] + r * a.cos(), origin[1] + r * a.sin(), height]
        }
    }
}

fn region_center(region: &Region) -> [f64; 3] {
    match *region {
        Region::Point { position } => position,
        Region::Disc { center, height, .. } => [center[0], center[1], height],
        Region::Sector {
            origin,
            height,
            min_distance,
            max_distance,
            min_angle_deg,
            max_angle_deg,
        } => {
            let r = 0.5 * (min_distance + max_distance);
            let a = (0.5 * (min_angle_deg + max_angle_deg)).to_radians();
            [origin[0] + r * a.cos(), origin[1] + r * a.sin(), height]
        }
    }
}

fn linear(n: usize, spacing: f64, position: [f64; 3]) -> ArraySite {
    ArraySite::new(position, Layout::Linear(n), spacing)
}

/// Receivers in group order, then sites with a non-zero element count.
pub fn build_geometry(spec: &ExperimentSpec, seed: u64) -> Geometry {
    let g = &spec.geometry;
    let mut rng = stream(derive(seed, purpose::PLACEMENT));
    let mut receivers = Vec::new();
    for group in &g.receivers {
        for _ in 0..group.count {
            receivers.push(Receiver {
                site: linear(group.antennas, g.tx.spacing, region_point(&group.region, &mut rng)),
                direct_blocked: group.direct_blocked,
            });
        }
    }
    let irs = g
        .irs_sites
        .iter()
        .zip(&spec.irs.elements)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| {
            let layout = if s.rows > 1 {
                Layout::Planar {
                    rows: s.rows,
                    cols: n / s.rows,
                }
            } else {
                Layout::Linear(n)
            };
            ArraySite::new(s.position, layout, s.spacing)
        })
        .collect();
    Geometry {
        tx: linear(g.tx.antennas, g.tx.spacing, g.tx.position),
        receivers,
        irs,
        wavelength: g.wavelength,
    }
}

fn fading_spec(l: &LinkSpec) -> FadingSpec {
    FadingSpec {
        model: match l.model {
            FadingKind::PureLos => FadingModel::PureLos,
            FadingKind::Rayleigh => FadingModel::Rayleigh,
            FadingKind::Rician => FadingModel::Rician {
                k_factor: l.k_factor.unwrap_or(0.0),
            },
        },
        pathloss: PathLoss {
            reference_loss_db: l.reference_loss_db,
            exponent: l.exponent,
        },
    }
}

pub fn link_fading(spec: &ExperimentSpec) -> LinkFading {
    LinkFading {
        direct: fading_spec(&spec.fading.direct),
        tx_irs: fading_spec(&spec.fading.tx_irs),
        irs_rx: fading_spec(&spec.fading.irs_rx),
    }
}

pub fn draw_instance(spec: &ExperimentSpec, seed: u64) -> irs_core::Result<Instance> {
    let geometry = build_geometry(spec, seed);
    let channels = draw_channels(
        &geometry,
        &link_fading(spec),
        dbm_to_watts(spec.noise_dbm),
        &mut stream(derive(seed, purpose::CHANNELS)),
    )?;
    Ok(Instance { geometry, channels })
}

fn indices(spec: &ExperimentSpec, role: Role) -> Vec<usize> {
    spec.geometry
        .receivers
        .iter()
        .flat_map(|g| std::iter::repeat_n(g.role, g.count))
        .enumerate()
        .filter(|(_, r)| *r == role)
        .map(|(i, _)| i)
        .collect()
}

pub fn secure_scenario(spec: &ExperimentSpec) -> SecureScenario {
    SecureScenario {
        users: indices(spec, Role::User),
        eavesdroppers: indices(spec, Role::Eavesdropper),
        power_budget: dbm_to_watts(spec.secure.power_dbm),
        leakage_cap: spec.secure.leakage_cap.unwrap_or(f64::INFINITY),
        csi_error: CsiError {
            radius: spec.secure.csi_radius,
            samples: spec.secure.csi_samples,
        },
    }
}

pub fn irs_model(spec: &ExperimentSpec) -> IrsModel {
    match spec.model() {
        ModelKind::Ids | ModelKind::Phy => IrsModel::Ids,
        ModelKind::Inw => IrsModel::Inw(match spec.irs.connectivity {
            ConnectivityKind::Single => Wiring::Single,
            ConnectivityKind::Full => Wiring::Full,
            ConnectivityKind::Partial => Wiring::Partial {
                group_size: spec.irs.group_size.unwrap_or(1),
            },
        }),
        ModelKind::Random => IrsModel::Random,
        ModelKind::None => IrsModel::None,
    }
}

fn ao_options(spec: &ExperimentSpec) -> AoOptions {
    AoOptions {
        max_sweeps: spec.algorithm.ao_sweeps,
        tol: spec.algorithm.ao_tolerance,
        ..AoOptions::default()
    }
}

pub fn secure_options(spec: &ExperimentSpec) -> SecureOptions {
    let mut o = SecureOptions::default();
    o.ao = AoOptions {
        slack: o.ao.slack,
        ..ao_options(spec)
    };
    o.penalty.inner.max_iter = spec.algorithm.max_iter;
    o.penalty.inner.tol = spec.algorithm.tolerance;
    o.irs_ascent.tol = spec.algorithm.tolerance;
    o.an_fraction = spec.secure.an_fraction;
    o.reference_impedance = spec.irs.reference_impedance;
    o
}

pub fn swipt_scenario(spec: &ExperimentSpec) -> SwiptScenario {
    let info = indices(spec, Role::Info);
    SwiptScenario {
        sinr_targets: vec![db_to_linear(spec.swipt.gamma_db); info.len()],
        info_receivers: info,
        energy_receivers: indices(spec, Role::Energy),
        min_harvested: dbm_to_watts(spec.swipt.min_harvested_dbm),
        efficiency: spec.swipt.efficiency,
    }
}

pub fn swipt_options(spec: &ExperimentSpec) -> SwiptOptions {
    let mut o = SwiptOptions::default();
    o.penalty.inner.max_iter = spec.algorithm.max_iter;
    o.penalty.inner.tol = spec.algorithm.tolerance;
    o.bound = match spec.algorithm.bound {
        BoundChoice::ChannelGain => BoundKind::ChannelGain,
        BoundChoice::Relaxation => BoundKind::Relaxation,
    };
    o.cap = DEFAULT_ENUMERATION_CAP;
    o
}

pub fn swipt_method(spec: &ExperimentSpec) -> SwiptMethod {
    match spec.method() {
        MethodKind::Bnb | MethodKind::Ao => SwiptMethod::Bnb,
        MethodKind::Exhaustive => SwiptMethod::Exhaustive,
        MethodKind::Penalty => SwiptMethod::Penalty,
        MethodKind::Random => SwiptMethod::Random,
        MethodKind::None => SwiptMethod::None,
    }
}

pub fn impairments(spec: &ExperimentSpec) -> ImpairmentSpec {
    let i = &spec.irs.impairments;
    ImpairmentSpec {
        quantization_bits: i.quantization_bits,
        phase_error: match i.phase_error {
            PhaseErrorSpec::None => PhaseError::None,
            PhaseErrorSpec::Uniform { half_width } => PhaseError::Uniform { half_width },
            PhaseErrorSpec::VonMises { kappa } => PhaseError::VonMises { kappa },
        },
        eevm: Eevm {
            kappa_tx: i.kappa_tx,
            kappa_rx: i.kappa_rx,
        },
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Codebook of the single SWIPT surface and its per-(tile, mode) channels.
pub fn tile_channels(spec: &ExperimentSpec, inst: &Instance) -> irs_core::Result<EffectiveTileChannels> {
    let irs = inst
        .geometry
        .irs
        .first()
        .ok_or_else(|| irs_core::Error::Contract("the tile framework needs a surface".into()))?;
    let aim = spec.codebook.aim.unwrap_or_else(|| {
        let pts: Vec<_> = spec
            .geometry
            .receivers
            .iter()
            .map(|g| region_center(&g.region))
            .collect();
        let n = pts.len() as f64;
        [0, 1, 2].map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / n)
    });
    let aoa = Direction::from_vector(sub(inst.geometry.tx.position, irs.position))?;
    let center = Direction::from_vector(sub(aim, irs.position))?;
    let (n, m) = (spec.codebook.tiles, spec.codebook.modes);
    let part = partition_tiles(irs.element_count(), n)?;
    let grid = nested_grid(m, center, spec.codebook.span)?;
    let cb = generate_codebook(&part, &irs.layout.offsets(), m, irs.spacing, aoa, &grid)?;
    precompute_tile_channels(&inst.channels, &part, &cb, Execution::Sequential)
}

/// Objective, feasibility and iteration count of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub objective: f64,
    pub feasible: bool,
    pub iterations: usize,
}

pub fn solve(spec: &ExperimentSpec, seed: u64) -> irs_core::Result<Outcome> {
    let inst = draw_instance(spec, seed)?;
    match spec.scenario {
        ScenarioKind::Secure => {
            let s = solve_secure(
                &secure_scenario(spec),
                &inst.channels,
                irs_model(spec),
                seed,
                &secure_options(spec),
            )?;
            Ok(Outcome {
                objective: s.objective,
                feasible: s.feasible,
                iterations: s.iterations,
            })
        }
        ScenarioKind::Swipt => {
            let tc = tile_channels(spec, &inst)?;
            let s = irs_core::scenarios::solve_swipt(
                &swipt_scenario(spec),
                &tc,
                inst.channels.noise_power,
                swipt_method(spec),
                seed,
                &swipt_options(spec),
            )?;
            Ok(Outcome {
                objective: s.objective,
                feasible: s.feasible,
                iterations: s.iterations,
            })
        }
        ScenarioKind::SingleLink => {
            let mut cs = inst.channels;
            if spec.model() == ModelKind::None {
                cs.tx_to_irs.clear();
                cs.irs_to_rx.clear();
            }
            let opts = SingleLinkOptions {
                ao: ao_options(spec),
                impairments: impairments(spec),
            };
            let s = solve_single_link(
                &cs,
                spec.single_link.receiver,
                dbm_to_watts(spec.single_link.power_dbm),
                seed,
                &opts,
            )?;
            Ok(Outcome {
                objective: s.snr,
                feasible: true,
                iterations: s.sweeps,
            })
        }
    }
}

/// Work item `(resolved index, trial)` in output order: sweep point, then
/// trial, then variant.
fn jobs(resolved: &[Resolved], trials: usize) -> Vec<(usize, usize)> {
    let per_point = resolved.iter().filter(|r| r.sweep_index == 0).count();
    let points = resolved.len() / per_point;
    let mut out = Vec::with_capacity(resolved.len() * trials);
    for p in 0..points {
        for t in 0..trials {
            for v in 0..per_point {
                out.push((p * per_point + v, t));
            }
        }
    }
    out
}

/// Runs every (sweep point, trial, variant) solve. Rows come back in job
/// order whatever the worker count; a solver error is reported on stderr and
/// recorded as an infeasible row with a NaN objective.
pub fn run_experiment(spec: &ExperimentSpec, exec: Execution) -> Result<ResultTable, CliError> {
    let resolved = spec.resolve()?;
    let work = jobs(&resolved, spec.mc.trials);
    let sweep_param = spec.sweep.as_ref().map(|s| s.parameter.clone()).unwrap_or_default();
    let rows = map_range(work.len(), exec, |j| {
        let (ri, trial) = work[j];
        let r = &resolved[ri];
        let seed = substream_seed(spec.mc.master_seed, r.sweep_index as u64, trial as u64);
        let start = Instant::now();
        let outcome = solve(&r.spec, seed).unwrap_or_else(|e| {
            eprintln!("sweep point {}, trial {trial}: {e}", r.sweep_index);
            Outcome {
                objective: f64::NAN,
                feasible: false,
                iterations: 0,
            }
        });
        ResultRow {
            scenario: r.spec.scenario.label().to_string(),
            model: r.variant.clone().unwrap_or_else(|| r.spec.model_label()),
            method: r.spec.method_label().to_string(),
            sweep_param: sweep_param.clone(),
            sweep_value: r.sweep_value.clone(),
            trial,
            objective: outcome.objective,
            feasible: outcome.feasible,
            iterations: outcome.iterations,
            runtime_ms: if spec.record_timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
            seed,
        }
    });
    Ok(ResultTable { rows })
}
