//! Brute-force subgame-perfect equilibria on discretized action grids.
//!
//! These routines share no code path with the analytic solvers beyond the
//! payoff definitions, so agreement between the two is meaningful evidence.

use rayon::prelude::*;
use serde::Serialize;

use crate::demand::DemandModel;
use crate::equilibrium::{
    unique_root, EquilibriumOutcome, FirmGroup, HeterogeneousLinearModel, QuadraticPayoff,
};
use crate::error::{Error, Result};
use crate::numeric::{golden_max, scan_roots};
use crate::sequence::PeriodSequence;

pub const MAX_GRID_POINTS: f64 = 1e6;
pub const MAX_ORACLE_FIRMS: u64 = 4;
pub const MAX_ORACLE_PERIODS: usize = 3;

/// Cells used when bracketing the followers' aggregate fixed point.
const FOLLOWER_SCAN_CELLS: usize = 1024;

/// Relative payoff difference below which two grid actions tie.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub step: f64,
    pub max_action: f64,
    pub max_sweeps: usize,
}

impl GridSpec {
    pub fn new(step: f64, max_action: f64, max_sweeps: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!("step {step} must be > 0")));
        }
        if !(max_action > 0.0 && max_action.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "max action {max_action} must be > 0"
            )));
        }
        if max_action / step > MAX_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{} grid points exceeds the limit of {MAX_GRID_POINTS}",
                max_action / step
            )));
        }
        if max_sweeps == 0 {
            return Err(Error::InvalidGrid("max_sweeps must be >= 1".into()));
        }
        Ok(GridSpec {
            step,
            max_action,
            max_sweeps,
        })
    }

    /// `step = scale / 2000` on `[0, scale]` with a 200-sweep cap.
    pub fn default_for(scale: f64) -> Result<Self> {
        GridSpec::new(scale / 2000.0, scale, 200)
    }

    fn points(&self) -> u64 {
        (self.max_action / self.step).round() as u64
    }
}

/// Payoffs that depend on a firm's own quantity and the final total only.
pub trait AggregativePayoff: Sync {
    fn payoff(&self, firm: usize, own: f64, total: f64) -> f64;
}

impl AggregativePayoff for DemandModel {
    fn payoff(&self, _firm: usize, own: f64, total: f64) -> f64 {
        own * self.margin(total)
    }
}

impl AggregativePayoff for QuadraticPayoff {
    fn payoff(&self, _firm: usize, own: f64, total: f64) -> f64 {
        QuadraticPayoff::payoff(self, own, total)
    }
}

impl AggregativePayoff for HeterogeneousLinearModel {
    fn payoff(&self, firm: usize, own: f64, total: f64) -> f64 {
        self.firms[firm].payoff(own, total)
    }
}

/// Any of the supported payoff specifications.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffModel {
    Demand(DemandModel),
    Heterogeneous(HeterogeneousLinearModel),
    Quadratic(QuadraticPayoff),
}

impl AggregativePayoff for PayoffModel {
    fn payoff(&self, firm: usize, own: f64, total: f64) -> f64 {
        match self {
            PayoffModel::Demand(m) => AggregativePayoff::payoff(m, firm, own, total),
            PayoffModel::Heterogeneous(m) => AggregativePayoff::payoff(m, firm, own, total),
            PayoffModel::Quadratic(m) => AggregativePayoff::payoff(m, firm, own, total),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOutcome {
    pub outcome: EquilibriumOutcome,
    /// Every subgame that was solved reached an exact grid fixed point.
    pub converged: bool,
    /// Largest best-response gap on the equilibrium path, in quantity units.
    pub gap: f64,
}

#[derive(Debug, Clone)]
struct Subgame {
    profile: Vec<u64>,
    final_state: u64,
    gap: u64,
    converged: bool,
}

struct GridSolver<'a, P: AggregativePayoff> {
    payoff: &'a P,
    grid: GridSpec,
    points: u64,
    /// first global firm index of each period
    offsets: Vec<usize>,
    counts: Vec<usize>,
    memo: Vec<Vec<Option<Subgame>>>,
    all_converged: bool,
}

impl<'a, P: AggregativePayoff> GridSolver<'a, P> {
    fn q(&self, idx: u64) -> f64 {
        idx as f64 * self.grid.step
    }

    fn final_state(&mut self, period: usize, state: u64) -> Result<u64> {
        if period == self.counts.len() {
            return Ok(state);
        }
        Ok(self.subgame(period, state)?.final_state)
    }

    fn subgame(&mut self, period: usize, state: u64) -> Result<Subgame> {
        if let Some(s) = &self.memo[period][state as usize] {
            return Ok(s.clone());
        }
        let s = self.solve_subgame(period, state)?;
        self.all_converged &= s.converged;
        self.memo[period][state as usize] = Some(s.clone());
        Ok(s)
    }

    /// Smallest maximizer of firm `firm`'s payoff given the others' sum.
    /// Payoffs within rounding noise of each other count as tied.
    fn best_response(&mut self, period: usize, firm: usize, base: u64) -> Result<u64> {
        let fin = self.final_state(period + 1, base)?;
        let mut best = (0, self.payoff.payoff(firm, 0.0, self.q(fin)));
        for a in 1..=self.points {
            let fin = self.final_state(period + 1, base + a)?;
            let v = self.payoff.payoff(firm, self.q(a), self.q(fin));
            if v > best.1 + TIE_TOL * best.1.abs().max(v.abs()) {
                best = (a, v);
            }
        }
        Ok(best.0)
    }

    /// Synchronous best-response iteration from the zero profile. With
    /// several firms each update moves halfway (rounded outward) toward the
    /// best response; undamped simultaneous updates cycle once three firms
    /// share a period. Symmetric firms can still alternate between two grid
    /// points forever when the continuous equilibrium falls between them, so
    /// after half the sweeps the firms update one at a time in index order.
    fn solve_subgame(&mut self, period: usize, state: u64) -> Result<Subgame> {
        let n = self.counts[period];
        let first = self.offsets[period];
        let mut profile = vec![0u64; n];
        let mut gap = u64::MAX;
        let mut best = (u64::MAX, profile.clone());
        let synchronous_sweeps = if n == 1 {
            self.grid.max_sweeps
        } else {
            self.grid.max_sweeps.div_ceil(2)
        };
        for sweep in 0..self.grid.max_sweeps {
            let sum: u64 = profile.iter().sum();
            let mut responses = Vec::with_capacity(n);
            for (j, &x) in profile.iter().enumerate() {
                responses.push(self.best_response(period, first + j, state + sum - x)?);
            }
            gap = profile
                .iter()
                .zip(&responses)
                .map(|(&x, &r)| x.abs_diff(r))
                .max()
                .unwrap_or(0);
            if gap < best.0 {
                best = (gap, profile.clone());
            }
            if gap == 0 {
                break;
            }
            if sweep < synchronous_sweeps {
                for (x, r) in profile.iter_mut().zip(&responses) {
                    *x = if n == 1 {
                        *r
                    } else if *r > *x {
                        *x + (*r - *x).div_ceil(2)
                    } else {
                        *x - (*x - *r).div_ceil(2)
                    };
                }
            } else {
                for j in 0..n {
                    let others = profile.iter().sum::<u64>() - profile[j];
                    profile[j] = self.best_response(period, first + j, state + others)?;
                }
            }
        }
        let (best_gap, best_profile) = best;
        let converged = gap == 0;
        let profile = if converged { profile } else { best_profile };
        let final_state = self.final_state(period + 1, state + profile.iter().sum::<u64>())?;
        Ok(Subgame {
            profile,
            final_state,
            gap: if converged { 0 } else { best_gap },
            converged,
        })
    }
}

/// Subgame-perfect equilibrium by backward induction over grid states.
///
/// Limited to at most four firms in three periods.
pub fn backward_induction_grid<P: AggregativePayoff>(
    payoff: &P,
    n: &PeriodSequence,
    grid: &GridSpec,
) -> Result<GridOutcome> {
    if n.total_firms() > MAX_ORACLE_FIRMS || n.periods() > MAX_ORACLE_PERIODS {
        return Err(Error::StateSpaceTooLarge(format!(
            "{n} exceeds {MAX_ORACLE_FIRMS} firms or {MAX_ORACLE_PERIODS} periods"
        )));
    }
    let points = grid.points();
    let counts: Vec<usize> = n.counts().iter().map(|&c| c as usize).collect();
    let offsets = counts
        .iter()
        .scan(0, |acc, &c| {
            let start = *acc;
            *acc += c;
            Some(start)
        })
        .collect();
    let max_state = points * n.total_firms();
    let mut solver = GridSolver {
        payoff,
        grid: *grid,
        points,
        offsets,
        counts: counts.clone(),
        memo: vec![vec![None; max_state as usize + 1]; counts.len()],
        all_converged: true,
    };

    let mut state = 0;
    let mut on_path = Vec::with_capacity(counts.len());
    for period in 0..counts.len() {
        let sub = solver.subgame(period, state)?;
        if !sub.converged {
            return Err(Error::NoConvergence {
                sweeps: grid.max_sweeps,
                gap: sub.gap as f64 * grid.step,
            });
        }
        state += sub.profile.iter().sum::<u64>();
        on_path.push(sub);
    }
    let total = solver.q(state);
    let gap = on_path.iter().map(|s| s.gap).max().unwrap_or(0) as f64 * grid.step;
    let mut groups = Vec::new();
    let mut firm = 0;
    for (t, sub) in on_path.iter().enumerate() {
        for &x in &sub.profile {
            let quantity = solver.q(x);
            groups.push(FirmGroup {
                period: t + 1,
                count: 1,
                quantity,
                profit: Some(payoff.payoff(firm, quantity, total)),
            });
            firm += 1;
        }
    }
    Ok(GridOutcome {
        outcome: EquilibriumOutcome {
            total,
            groups,
            residual: gap,
            price: None,
            competitive_quantity: None,
        },
        converged: solver.all_converged,
        gap,
    })
}

/// Symmetric Cournot total with `n` firms: the root of `X = n g(X)`.
pub fn cournot_fixed_point(model: &DemandModel, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidSequence("at least one firm required".into()));
    }
    let xbar_c = model.competitive_quantity()?.xbar_c;
    unique_root(|x| Ok(x - n as f64 * model.g(x)), 0.0, xbar_c)
}

/// Total once `followers` simultaneous followers respond to `x1`. When their
/// first-order condition has several symmetric solutions the followers play
/// the one that pays them most.
fn followers_total(model: &DemandModel, followers: u32, x1: f64, xbar_c: f64) -> Result<f64> {
    if followers == 0 || x1 >= xbar_c {
        return Ok(x1);
    }
    let f = followers as f64;
    let condition = |x: f64| x - x1 - f * model.g(x);
    let roots = scan_roots(&condition, x1, xbar_c, FOLLOWER_SCAN_CELLS);
    let follower_profit = |x: f64| (x - x1) / f * model.margin(x);
    roots
        .iter()
        .copied()
        .reduce(|best, x| if follower_profit(x) > follower_profit(best) { x } else { best })
        .ok_or(Error::RegularityViolated { roots })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeaderOptimum {
    pub leader_quantity: f64,
    pub total: f64,
}

/// One leader facing `followers` simultaneous followers: maximizes the
/// leader's profit over a grid of its own quantity (followers solved exactly
/// for each candidate), then refines between the neighbours of the grid
/// maximizer by golden-section search.
pub fn nested_leader_optimum(
    model: &DemandModel,
    followers: u32,
    grid: &GridSpec,
) -> Result<LeaderOptimum> {
    let xbar_c = model.competitive_quantity()?.xbar_c;
    let points = grid.points();
    let profit_at = |x1: f64| -> Result<f64> {
        let total = followers_total(model, followers, x1, xbar_c)?;
        Ok(x1 * model.margin(total))
    };
    let profits: Vec<f64> = (0..=points)
        .into_par_iter()
        .map(|i| profit_at(i as f64 * grid.step))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in profits.iter().enumerate() {
        if v > profits[best] {
            best = i;
        }
    }
    let lo = best.saturating_sub(1) as f64 * grid.step;
    let hi = (best as u64 + 1).min(points) as f64 * grid.step;
    let refined = golden_max(&|x| profit_at(x).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-12);
    let leader_quantity = if profit_at(refined)? >= profits[best] {
        refined
    } else {
        best as f64 * grid.step
    };
    Ok(LeaderOptimum {
        leader_quantity,
        total: followers_total(model, followers, leader_quantity, xbar_c)?,
    })
}
