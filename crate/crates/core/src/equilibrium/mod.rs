//! Equilibrium solvers for sequential quantity games.
//!
//! Every solver returns an [`EquilibriumOutcome`]: the total quantity and one
//! [`FirmGroup`] per block of identical firms. Symmetric periods appear as a
//! single group with a count; heterogeneous firms get a group each.

mod general;
mod heterogeneous;
mod linear;
mod quadratic;

pub(crate) use general::unique_root;
pub use general::{g_sequence, solve_general, solve_two_period_single_leader, GValues};
pub use heterogeneous::{solve_heterogeneous_linear, FirmParams, HeterogeneousLinearModel};
pub use linear::{
    competitive_limit_quantities, expected_best_response_linear, solve_linear_closed_form,
    BeliefDistribution,
};
pub use quadratic::{
    quadratic_si_condition, solve_quadratic_two_period, QuadraticPayoff, QuadraticSolution,
};

use serde::Serialize;

use crate::demand::DemandModel;
use crate::error::{Error, Result};

/// Quantities in `(-INTERIOR_TOL, 0)` are rounding noise and clamp to zero.
pub const INTERIOR_TOL: f64 = 1e-12;

/// Subintervals scanned for sign changes of an equilibrium condition.
pub const ROOT_SCAN_CELLS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirmGroup {
    /// 1-based period.
    pub period: usize,
    /// Identical firms represented by this group.
    pub count: u32,
    /// Quantity of each firm in the group.
    pub quantity: f64,
    /// Per-firm profit, when the payoff model defines one.
    pub profit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumOutcome {
    pub total: f64,
    pub groups: Vec<FirmGroup>,
    /// Residual of the equilibrium condition at `total`.
    pub residual: f64,
    pub price: Option<f64>,
    pub competitive_quantity: Option<f64>,
}

/// One row per firm, as written by the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmRow {
    pub period: usize,
    /// 1-based index over all firms in arrival order.
    pub firm_index: usize,
    pub quantity: f64,
    pub profit: Option<f64>,
}

impl EquilibriumOutcome {
    /// `xbar_c - X*`, proportional to dead-weight loss under linear demand.
    pub fn dwl_proxy(&self) -> Option<f64> {
        self.competitive_quantity.map(|xc| xc - self.total)
    }

    /// Sum of all firm quantities.
    pub fn quantity_sum(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.count as f64 * g.quantity)
            .sum()
    }

    /// Per-firm quantities of period `t`, expanded.
    pub fn period_quantities(&self, t: usize) -> Vec<f64> {
        self.groups
            .iter()
            .filter(|g| g.period == t)
            .flat_map(|g| std::iter::repeat_n(g.quantity, g.count as usize))
            .collect()
    }

    /// Quantity of the first firm in period `t`.
    pub fn quantity_in_period(&self, t: usize) -> Option<f64> {
        self.groups.iter().find(|g| g.period == t).map(|g| g.quantity)
    }

    /// Expands groups into individual firms.
    pub fn firms(&self) -> Vec<FirmRow> {
        let mut rows = Vec::new();
        for g in &self.groups {
            for _ in 0..g.count {
                rows.push(FirmRow {
                    period: g.period,
                    firm_index: rows.len() + 1,
                    quantity: g.quantity,
                    profit: g.profit,
                });
            }
        }
        rows
    }

    /// Fills price and profits from a demand model.
    pub fn priced(mut self, model: &DemandModel) -> Self {
        let price = model.price(self.total);
        let margin = price - model.cost();
        self.price = Some(price);
        for g in &mut self.groups {
            g.profit = Some(g.quantity * margin);
        }
        self
    }
}

/// Applies the interiority tolerance.
pub(crate) fn interior(period: usize, quantity: f64) -> Result<f64> {
    if quantity < -INTERIOR_TOL || quantity.is_nan() {
        Err(Error::NonInterior { period, quantity })
    } else {
        Ok(quantity.max(0.0))
    }
}
