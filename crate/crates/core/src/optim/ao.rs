//! Block-coordinate (alternating) ascent.

use crate::error::{Error, Result};

/// One block of the alternating scheme: given the full state, return a state
/// in which only this block changed.
pub struct Block<'a, S> {
    pub name: &'static str,
    pub update: Box<dyn FnMut(&S) -> Result<S> + 'a>,
}

impl<'a, S> Block<'a, S> {
    pub fn new(name: &'static str, update: impl FnMut(&S) -> Result<S> + 'a) -> Self {
        Block {
            name,
            update: Box::new(update),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoOptions {
    pub max_sweeps: usize,
    /// Stop when a full sweep improves the objective by less than
    /// `tol·max(1, |f|)`.
    pub tol: f64,
    /// Decreases up to this size are accepted as round-off.
    pub slack: f64,
}

impl Default for AoOptions {
    fn default() -> Self {
        AoOptions {
            max_sweeps: 50,
            tol: 1e-6,
            slack: 1e-9,
        }
    }
}

/// A block update that would have lowered the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockViolation {
    pub sweep: usize,
    pub block: &'static str,
    pub decrease: f64,
}

#[derive(Debug, Clone)]
pub struct AoReport<S> {
    pub state: S,
    pub objective: f64,
    /// Objective after every block update (rejected updates repeat the value).
    pub trace: Vec<f64>,
    /// Objective at the end of every sweep.
    pub sweep_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Updates rejected because they decreased the objective beyond the slack.
    pub violations: Vec<BlockViolation>,
}

/// Cycles through the blocks until a sweep stops improving the objective.
///
/// An update that decreases the objective by more than `slack` is rejected and
/// recorded in [`AoReport::violations`], so the reported trace is monotone.
pub fn alternating_optimize<S, F>(
    init: S,
    blocks: &mut [Block<'_, S>],
    objective: F,
    opts: &AoOptions,
) -> Result<AoReport<S>>
where
    F: Fn(&S) -> f64,
{
    if blocks.len() < 2 {
        return Err(Error::Contract(format!(
            "alternating optimisation needs at least two blocks, got {}",
            blocks.len()
        )));
    }
    let mut state = init;
    let mut f = objective(&state);
    let mut trace = vec![f];
    let mut sweep_trace = vec![f];
    let mut violations = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        let start = f;
        for b in blocks.iter_mut() {
            let cand = (b.update)(&state)?;
            let fc = objective(&cand);
            if fc >= f - opts.slack {
                // tiny round-off decreases are accepted but not recorded in the trace
                state = cand;
                f = fc.max(f);
            } else {
                violations.push(BlockViolation {
                    sweep: sweeps,
                    block: b.name,
                    decrease: f - fc,
                });
            }
            trace.push(f);
        }
        sweeps += 1;
        sweep_trace.push(f);
        if f - start <= opts.tol * start.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(AoReport {
        state,
        objective: f,
        trace,
        sweep_trace,
        sweeps,
        converged,
        violations,
    })
}
