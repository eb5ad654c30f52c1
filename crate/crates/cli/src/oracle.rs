//! Exhaustive enumeration versus branch-and-bound on every SWIPT instance of
//! a specification.

use irs_core::optim::{
    branch_and_bound, exhaustive_select, full_tree_nodes, selection_space, BnbOptions, SelectionOptions,
};
use irs_core::parallel::{map_range, Execution};
use irs_core::rng::substream_seed;
use irs_core::scenarios::SwiptSelection;

use crate::config::{ExperimentSpec, ScenarioKind};
use crate::error::CliError;
use crate::experiment::{draw_instance, swipt_options, swipt_scenario, tile_channels};

/// Relative objective agreement required between the two searches.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub sweep_index: usize,
    pub trial: usize,
    pub variant: Option<String>,
    pub tiles: usize,
    pub modes: usize,
    pub exhaustive: f64,
    pub bnb: f64,
    pub bnb_nodes: usize,
    pub bnb_evaluations: usize,
    /// `M^N` leaves.
    pub enumerated: u128,
    /// `Σ_{d=1..N} M^d` nodes.
    pub tree_nodes: u128,
}

impl OracleCase {
    pub fn objectives_agree(&self) -> bool {
        let (a, b) = (self.exhaustive, self.bnb);
        a == b || (a - b).abs() <= ORACLE_TOLERANCE * a.abs().max(b.abs())
    }

    pub fn passes(&self) -> bool {
        self.objectives_agree()
            && self.bnb_evaluations as u128 <= self.enumerated
            && self.bnb_nodes as u128 <= self.tree_nodes
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleReport {
    pub cases: Vec<OracleCase>,
}

impl OracleReport {
    pub fn failures(&self) -> Vec<&OracleCase> {
        self.cases.iter().filter(|c| !c.passes()).collect()
    }
}

fn check_one(spec: &ExperimentSpec, seed: u64) -> irs_core::Result<(f64, f64, usize, usize)> {
    let inst = draw_instance(spec, seed)?;
    let tc = tile_channels(spec, &inst)?;
    let opts = swipt_options(spec);
    let p = SwiptSelection::new(&swipt_scenario(spec), &tc, inst.channels.noise_power, &opts)?;
    let ex = exhaustive_select(
        &p,
        &SelectionOptions {
            cap: opts.cap,
            execution: Execution::Sequential,
        },
    )?;
    let bb = branch_and_bound(&p, &|prefix: &[usize]| p.bound(prefix), &BnbOptions { cap: opts.cap })?;
    Ok((ex.objective(), bb.objective(), bb.nodes, bb.evaluations))
}

/// Solves each (sweep point, trial, variant) instance both ways.
pub fn oracle_check(spec: &ExperimentSpec, exec: Execution) -> Result<OracleReport, CliError> {
    if spec.scenario != ScenarioKind::Swipt {
        return Err(CliError::Config("oracle-check needs a swipt scenario".into()));
    }
    let resolved = spec.resolve()?;
    let trials = spec.mc.trials;
    let cases = map_range(resolved.len() * trials, exec, |j| {
        let (r, trial) = (&resolved[j / trials], j % trials);
        let seed = substream_seed(spec.mc.master_seed, r.sweep_index as u64, trial as u64);
        let (n, m) = (r.spec.codebook.tiles, r.spec.codebook.modes);
        let (exhaustive, bnb, bnb_nodes, bnb_evaluations) = check_one(&r.spec, seed)
            .map_err(|e| CliError::Config(format!("sweep point {}, trial {trial}: {e}", r.sweep_index)))?;
        Ok(OracleCase {
            sweep_index: r.sweep_index,
            trial,
            variant: r.variant.clone(),
            tiles: n,
            modes: m,
            exhaustive,
            bnb,
            bnb_nodes,
            bnb_evaluations,
            enumerated: selection_space(n, m, u128::MAX).unwrap_or(u128::MAX),
            tree_nodes: full_tree_nodes(n, m),
        })
    });
    Ok(OracleReport {
        cases: cases.into_iter().collect::<Result<_, CliError>>()?,
    })
}
