//! Discrete transmission-mode selection: exhaustive enumeration and
//! branch-and-bound.

use crate::codebook::ModeSelection;
use crate::error::{Error, Result};
use crate::parallel::{map_range, Execution};

/// Result of solving the continuous problem for one fixed selection.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome<S> {
    pub solution: S,
    pub objective: f64,
    pub feasible: bool,
}

impl<S> InnerOutcome<S> {
    /// Objective used for ranking: `+∞` when infeasible.
    pub fn merit(&self) -> f64 {
        if self.feasible {
            self.objective
        } else {
            f64::INFINITY
        }
    }
}

/// A minimisation over one mode per tile.
pub trait SelectionProblem: Sync {
    type Solution: Clone + Send;

    fn tile_count(&self) -> usize;

    fn mode_count(&self) -> usize;

    /// Must be deterministic and reentrant.
    fn inner_solve(&self, selection: &ModeSelection) -> Result<InnerOutcome<Self::Solution>>;
}

pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOptions {
    pub cap: u128,
    pub execution: Execution,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            cap: DEFAULT_ENUMERATION_CAP,
            execution: Execution::Sequential,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectionReport<S> {
    /// Best feasible selection, or the lexicographically first one when none is feasible.
    pub selection: ModeSelection,
    pub outcome: Option<InnerOutcome<S>>,
    pub feasible: bool,
    /// Inner solves performed.
    pub evaluations: usize,
    /// Search-tree nodes visited below the root.
    pub nodes: usize,
    /// Objective of the first complete selection reached (the greedy dive).
    pub first_leaf_objective: f64,
    /// Incumbent objective after each improvement.
    pub trace: Vec<f64>,
}

impl<S> SelectionReport<S> {
    pub fn objective(&self) -> f64 {
        self.outcome.as_ref().map_or(f64::INFINITY, |o| o.merit())
    }
}

/// `M^N`, or a refusal when it exceeds `cap`.
pub fn selection_space(tiles: usize, modes: usize, cap: u128) -> Result<u128> {
    let mut size: u128 = 1;
    for _ in 0..tiles {
        size = size.saturating_mul(modes as u128);
    }
    if size > cap {
        return Err(Error::Refused { size, cap });
    }
    Ok(size)
}

/// Nodes of the full enumeration tree below the root, `Σ_{d=1..N} M^d`.
pub fn full_tree_nodes(tiles: usize, modes: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..tiles {
        level = level.saturating_mul(modes as u128);
        total = total.saturating_add(level);
    }
    total
}

fn decode(mut index: u128, tiles: usize, modes: usize) -> ModeSelection {
    let mut sel = vec![0; tiles];
    for slot in sel.iter_mut().rev() {
        *slot = (index % modes as u128) as usize;
        index /= modes as u128;
    }
    ModeSelection(sel)
}

fn check_shape<P: SelectionProblem>(problem: &P) -> Result<()> {
    if problem.tile_count() == 0 || problem.mode_count() == 0 {
        return Err(Error::Contract(
            "selection problem needs at least one tile and one mode".into(),
        ));
    }
    Ok(())
}

/// Solves every selection and returns the feasible minimiser; ties go to the
/// lexicographically smallest selection.
pub fn exhaustive_select<P: SelectionProblem>(
    problem: &P,
    opts: &SelectionOptions,
) -> Result<SelectionReport<P::Solution>> {
    check_shape(problem)?;
    let (n, m) = (problem.tile_count(), problem.mode_count());
    let size = selection_space(n, m, opts.cap)?;
    let outcomes = map_range(size as usize, opts.execution, |i| {
        problem.inner_solve(&decode(i as u128, n, m))
    });
    let mut best: Option<(usize, InnerOutcome<P::Solution>)> = None;
    let mut trace = Vec::new();
    let mut first = f64::NAN;
    for (i, o) in outcomes.into_iter().enumerate() {
        let o = o?;
        if i == 0 {
            first = o.merit();
        }
        let better = match &best {
            None => true,
            Some((_, b)) => o.merit() < b.merit(),
        };
        if better {
            if o.feasible {
                trace.push(o.objective);
            }
            best = Some((i, o));
        }
    }
    let (i, o) = best.expect("selection space is non-empty");
    Ok(SelectionReport {
        selection: decode(i as u128, n, m),
        feasible: o.feasible,
        outcome: Some(o),
        evaluations: size as usize,
        nodes: full_tree_nodes(n, m) as usize,
        first_leaf_objective: first,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbOptions {
    pub cap: u128,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

struct Search<'a, P: SelectionProblem, B> {
    problem: &'a P,
    bound: &'a B,
    best: Option<(ModeSelection, InnerOutcome<P::Solution>)>,
    nodes: usize,
    evaluations: usize,
    first_leaf: Option<f64>,
    trace: Vec<f64>,
}

impl<P, B> Search<'_, P, B>
where
    P: SelectionProblem,
    B: Fn(&[usize]) -> f64,
{
    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |(_, o)| o.merit())
    }

    fn visit(&mut self, prefix: &mut Vec<usize>) -> Result<()> {
        let (n, m) = (self.problem.tile_count(), self.problem.mode_count());
        if prefix.len() == n {
            let sel = ModeSelection(prefix.clone());
            let o = self.problem.inner_solve(&sel)?;
            self.evaluations += 1;
            if self.first_leaf.is_none() {
                self.first_leaf = Some(o.merit());
            }
            let better = match &self.best {
                None => true,
                Some((s, b)) => o.merit() < b.merit() || (o.merit() == b.merit() && sel < *s),
            };
            if better {
                if o.feasible {
                    self.trace.push(o.objective);
                }
                self.best = Some((sel, o));
            }
            return Ok(());
        }
        let mut children: Vec<(f64, usize)> = (0..m)
            .map(|k| {
                prefix.push(k);
                let b = (self.bound)(prefix);
                prefix.pop();
                (b, k)
            })
            .collect();
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (b, k) in children {
            // an empty incumbent never prunes, so the first dive always reaches a leaf
            if self.best.is_some() && b >= self.incumbent() {
                continue;
            }
            self.nodes += 1;
            prefix.push(k);
            self.visit(prefix)?;
            prefix.pop();
        }
        Ok(())
    }
}

/// Depth-first branch-and-bound over tiles.
///
/// `bound(prefix)` must not exceed the best objective reachable by completing
/// `prefix`; children are explored in increasing bound order and pruned when
/// their bound reaches the incumbent. Optimality holds relative to the
/// validity of the bound and the exactness of the inner solver.
pub fn branch_and_bound<P, B>(problem: &P, bound: &B, opts: &BnbOptions) -> Result<SelectionReport<P::Solution>>
where
    P: SelectionProblem,
    B: Fn(&[usize]) -> f64,
{
    check_shape(problem)?;
    selection_space(problem.tile_count(), problem.mode_count(), opts.cap)?;
    let mut s = Search {
        problem,
        bound,
        best: None,
        nodes: 0,
        evaluations: 0,
        first_leaf: None,
        trace: Vec::new(),
    };
    s.visit(&mut Vec::with_capacity(problem.tile_count()))?;
    let (selection, outcome) = s.best.expect("the first dive always reaches a leaf");
    Ok(SelectionReport {
        feasible: outcome.feasible,
        selection,
        outcome: Some(outcome),
        evaluations: s.evaluations,
        nodes: s.nodes,
        first_leaf_objective: s.first_leaf.unwrap_or(f64::INFINITY),
        trace: s.trace,
    })
}
